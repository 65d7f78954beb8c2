use criterion::{criterion_group, criterion_main, Criterion};
use ffstat_core::statistics::{mean_variance_nu, TypeTable};
use ffstat_core::verify::{scan_intervals, scan_intervals_with_table, scan_progressions};
use ffstat_core::{make_field, Partition, ScanOptions};

fn bench_scans(c: &mut Criterion) {
    let options = ScanOptions::default();
    let mut group = c.benchmark_group("scans");
    group.sample_size(10);

    let f5 = make_field(5, 1).unwrap();
    group.bench_function("scan_intervals_q5_k6_m2", |b| {
        b.iter(|| scan_intervals(&f5, 6, 2, &Partition::single(6), &options).unwrap())
    });

    let table = TypeTable::build(&f5, 6, &options).unwrap();
    group.bench_function("scan_intervals_prebuilt_q5_k6_m2", |b| {
        b.iter(|| scan_intervals_with_table(&table, 2, &Partition::single(6), &options).unwrap())
    });

    let f3 = make_field(3, 1).unwrap();
    group.bench_function("scan_progressions_q3_k6_m2", |b| {
        b.iter(|| scan_progressions(&f3, 6, 2, &Partition::single(6), &options).unwrap())
    });

    let f7 = make_field(7, 1).unwrap();
    group.bench_function("mean_variance_q7_k5_m1", |b| {
        b.iter(|| mean_variance_nu(&f7, 5, 1, &options).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_scans);
criterion_main!(benches);
