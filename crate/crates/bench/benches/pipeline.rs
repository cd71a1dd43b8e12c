use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use signphon::coarticulation::{scan, DetectorThresholds};
use signphon::disambiguator::interpret_utterance;
use signphon::reranker::{evaluate, rerank};
use signphon::transitions::TransitionTable;
use signphon::ExclusionPolicy;
use signphon_bench::Fixtures;

fn pipeline(c: &mut Criterion) {
    let f = Fixtures::load();
    c.bench_function("fit start/end corpus", |b| {
        b.iter(|| TransitionTable::fit(f.start_end.refs().map(|r| f.start_end.get(r)), &f.inv))
    });
    c.bench_function("coarticulation scan", |b| {
        b.iter(|| {
            scan(&f.coartic, &f.lex, &f.inv, &ExclusionPolicy::default(), &DetectorThresholds::default()).unwrap()
        })
    });
    c.bench_function("disambiguate fixtures", |b| {
        b.iter(|| {
            for u in &f.disambiguation.utterances {
                black_box(interpret_utterance(u, &f.lex, &f.inv).unwrap());
            }
        })
    });
    let set = f.noisy(0.5, 1_000);
    c.bench_function("rerank one observation", |b| {
        b.iter(|| rerank(black_box(&set[0].obs), &f.prior, 1.0, &f.inv).unwrap())
    });
    c.bench_function("evaluate 1k samples", |b| b.iter(|| evaluate(&set, &f.prior, 1.0, &f.inv).unwrap()));
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
