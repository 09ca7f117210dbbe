use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semifactual::data::synthetic::two_gaussians;
use semifactual::eval::metric_robustness;
use semifactual::explain::ExplainContext;
use semifactual::model::{fit_classifier, ForestParams};
use semifactual::parallel::{par_map, Jobs};
use semifactual::sf_free::mdn_sf;
use semifactual::sf_guided::{kleor_sf, KleorVariant};

fn sweep(c: &mut Criterion) {
    let train = two_gaussians(400, 1);
    let clf = fit_classifier(&train, ForestParams { n_trees: 50, ..Default::default() }, 1).unwrap();
    let ctx = ExplainContext::new(train, clf);
    let queries: Vec<(usize, Vec<f64>)> = two_gaussians(32, 2).instances.into_iter().enumerate().collect();

    let mut group = c.benchmark_group("query_sweep");
    group.sample_size(10);
    for (name, jobs) in [("sequential", Jobs::SEQUENTIAL), ("parallel", Jobs(None))] {
        group.bench_with_input(BenchmarkId::new("kleor_robustness", name), &jobs, |b, &jobs| {
            b.iter(|| {
                par_map(&queries, jobs, |(qi, q)| {
                    let sf = kleor_sf(q, *qi, &ctx, KleorVariant::AttrSim).unwrap();
                    metric_robustness(q, &sf.instance, 0.1, 50, *qi as u64, |x, i| {
                        kleor_sf(x, i, &ctx, KleorVariant::AttrSim).ok().map(|s| s.instance)
                    })
                    .map(|r| r.max_ratio)
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("mdn", name), &jobs, |b, &jobs| {
            b.iter(|| par_map(&queries, jobs, |(qi, q)| mdn_sf(q, *qi, &ctx).ok().map(|s| s.instance)))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
