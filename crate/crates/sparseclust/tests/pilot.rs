//! Temporary pilot runs used to size the acceptance datasets. Not part of
//! the shipped suite.

use std::time::Instant;

use sparseclust::data::*;
use sparseclust::graph::ncut;
use sparseclust::netsim::{partition_edges, PartitionStrategy};
use sparseclust::protocols::*;

fn summarize(name: &str, res: &sparseclust::protocols::ProtocolResult) {
    println!(
        "  {name}: ncut={:.4} diverged={} kept={} bits={} rounds={} ms={}",
        res.ncut,
        res.diverged,
        res.sparsifier_edges,
        res.ledger.total_bits(),
        res.ledger.rounds(),
        res.runtime_ms
    );
}

#[test]
#[ignore]
fn pilot_gauss() {
    let t0 = Instant::now();
    let d = gen_gauss(1000, 4, 1.0, 1).unwrap();
    println!("gauss n=1000: m={} gen={:?}", d.graph.m(), t0.elapsed());
    println!(
        "  components={} wmax={:.3e} wmin={:.3e} maxdeg={:.1}",
        d.graph.num_components(),
        d.graph.max_weight(),
        d.graph.min_weight(),
        d.graph.max_degree()
    );
    let truth = d.truth_partition().unwrap();
    println!("  truth ncut={:.5}", ncut(&d.graph, &truth).unwrap());

    let shards = partition_edges(&d.graph, 15, PartitionStrategy::Random, 2).unwrap();

    let t = Instant::now();
    let base = run_baseline(&shards, &ProtocolConfig::new(4, 3)).unwrap();
    println!("baseline took {:?}", t.elapsed());
    summarize("baseline", &base);
    println!("  agreement={:.4}", base.agreement(&d.graph, &truth));

    let t = Instant::now();
    let cfg = ProtocolConfig::new(4, 3).with_mode(SamplingMode::Budget { c: 5.0 });
    let mp = run_msgpassing(&shards, &cfg).unwrap();
    println!("msgpassing c=5 took {:?}", t.elapsed());
    summarize("msgpassing", &mp);
    println!("  agreement={:.4}", mp.agreement(&d.graph, &truth));

    let t = Instant::now();
    let cfg = ProtocolConfig::new(4, 3)
        .with_mode(SamplingMode::Budget { c: 10.0 })
        .with_chain_rounds(18);
    let bb = run_blackboard(&shards, &cfg).unwrap();
    println!("blackboard c=10 r=18 took {:?}", t.elapsed());
    summarize("blackboard", &bb);
    println!("  agreement={:.4}", bb.agreement(&d.graph, &truth));

    // Figure-6 style: rounds = 5 should diverge.
    for seed in [3u64, 4, 5] {
        let cfg = ProtocolConfig::new(4, seed)
            .with_mode(SamplingMode::Budget { c: 10.0 })
            .with_chain_rounds(5);
        let r5 = run_blackboard(&shards, &cfg).unwrap();
        summarize(&format!("blackboard r=5 seed={seed}"), &r5);
    }
    // Figure-5 style: msgpassing c=3 s=1 should diverge.
    let shard1 = partition_edges(&d.graph, 1, PartitionStrategy::Random, 2).unwrap();
    for seed in [3u64, 4, 5] {
        let cfg = ProtocolConfig::new(4, seed).with_mode(SamplingMode::Budget { c: 3.0 });
        let r = run_msgpassing(&shard1, &cfg).unwrap();
        summarize(&format!("msgpassing c=3 s=1 seed={seed}"), &r);
    }
}

#[test]
#[ignore]
fn pilot_moons() {
    let t0 = Instant::now();
    let d = gen_twomoons(1400, 0.1, 700, 1).unwrap();
    println!("moons n=1400: m={} gen={:?}", d.graph.m(), t0.elapsed());
    println!(
        "  components={} wmax={:.3e} wmin={:.3e} maxdeg={:.1}",
        d.graph.num_components(),
        d.graph.max_weight(),
        d.graph.min_weight(),
        d.graph.max_degree()
    );
    let truth = d.truth_partition().unwrap();
    println!("  truth ncut={:.5}", ncut(&d.graph, &truth).unwrap());

    let shards = partition_edges(&d.graph, 15, PartitionStrategy::Random, 2).unwrap();
    let t = Instant::now();
    let base = run_baseline(&shards, &ProtocolConfig::new(2, 3)).unwrap();
    println!("baseline took {:?}", t.elapsed());
    summarize("baseline", &base);
    println!("  agreement={:.4}", base.agreement(&d.graph, &truth));

    let t = Instant::now();
    let cfg = ProtocolConfig::new(2, 3).with_mode(SamplingMode::Budget { c: 5.0 });
    let mp = run_msgpassing(&shards, &cfg).unwrap();
    println!("msgpassing took {:?}", t.elapsed());
    summarize("msgpassing", &mp);
    println!("  agreement={:.4}", mp.agreement(&d.graph, &truth));

    let t = Instant::now();
    let cfg = ProtocolConfig::new(2, 3)
        .with_mode(SamplingMode::Budget { c: 10.0 })
        .with_chain_rounds(18);
    let bb = run_blackboard(&shards, &cfg).unwrap();
    println!("blackboard took {:?}", t.elapsed());
    summarize("blackboard", &bb);
    println!("  agreement={:.4}", bb.agreement(&d.graph, &truth));
}

#[test]
#[ignore]
fn pilot_planted() {
    let d = gen_planted(200, 4, 0.5, 0.01, 1).unwrap();
    println!("planted n=200: m={} components={}", d.graph.m(), d.graph.num_components());
    let truth = d.truth_partition().unwrap();
    println!("  truth ncut={:.5}", ncut(&d.graph, &truth).unwrap());
    let shards = partition_edges(&d.graph, 15, PartitionStrategy::Random, 2).unwrap();
    let base = run_baseline(&shards, &ProtocolConfig::new(4, 3)).unwrap();
    summarize("baseline", &base);
    println!("  agreement={:.4}", base.agreement(&d.graph, &truth));
    let mp = run_msgpassing(
        &shards,
        &ProtocolConfig::new(4, 3).with_mode(SamplingMode::Budget { c: 5.0 }),
    )
    .unwrap();
    summarize("msgpassing", &mp);
    println!("  agreement={:.4}", mp.agreement(&d.graph, &truth));
    let bb = run_blackboard(
        &shards,
        &ProtocolConfig::new(4, 3)
            .with_mode(SamplingMode::Budget { c: 10.0 })
            .with_chain_rounds(18),
    )
    .unwrap();
    summarize("blackboard", &bb);
    println!("  agreement={:.4}", bb.agreement(&d.graph, &truth));

    // Fig-5 corner on planted.
    let shard1 = partition_edges(&d.graph, 1, PartitionStrategy::Random, 2).unwrap();
    for seed in [3u64, 4, 5] {
        let r = run_msgpassing(
            &shard1,
            &ProtocolConfig::new(4, seed).with_mode(SamplingMode::Budget { c: 3.0 }),
        )
        .unwrap();
        summarize(&format!("msgpassing c=3 s=1 seed={seed}"), &r);
    }
}

#[test]
#[ignore]
fn pilot_criterion1() {
    use sparseclust::laplacian::laplacian;
    use sparseclust::linalg::psd_between;
    use sparseclust::sparsify::*;
    // ER(200, 0.1), exact scores, α = 8ε⁻²·ln n at ε = 0.5.
    let mut kept_total = 0usize;
    let mut pass = 0;
    let mut m_total = 0usize;
    let alpha = oversample_alpha(8.0, 0.5, 200);
    println!("alpha = {alpha:.2}");
    for seed in 0..20u64 {
        let d = gen_planted(200, 1, 0.1, 0.0, seed).unwrap();
        let g = &d.graph;
        m_total += g.m();
        let tau = leverage_exact(g, 0.0).unwrap();
        let h = sample_sparsifier(g, &tau, alpha, seed).unwrap();
        kept_total += h.m();
        let ok = psd_between(
            &laplacian(g).to_dense(),
            &laplacian(&h).to_dense(),
            0.5,
            1.5,
            true,
        )
        .unwrap();
        if ok {
            pass += 1;
        }
    }
    println!(
        "criterion1 pilot: mean kept fraction = {:.3}, psd pass = {pass}/20",
        kept_total as f64 / m_total as f64
    );

    // What sparsity does a smaller alpha give, and does psd still pass?
    for alpha in [4.0, 6.0, 8.0, 12.0] {
        let mut kept = 0usize;
        let mut m_tot = 0usize;
        let mut pass = 0;
        for seed in 100..120u64 {
            let d = gen_planted(200, 1, 0.3, 0.0, seed).unwrap();
            let g = &d.graph;
            m_tot += g.m();
            let tau = leverage_exact(g, 0.0).unwrap();
            let h = sample_sparsifier(g, &tau, alpha, seed).unwrap();
            kept += h.m();
            if psd_between(
                &laplacian(g).to_dense(),
                &laplacian(&h).to_dense(),
                0.5,
                1.5,
                true,
            )
            .unwrap()
            {
                pass += 1;
            }
        }
        println!(
            "  ER(200,0.3) alpha={alpha}: kept fraction {:.3}, psd pass {pass}/20",
            kept as f64 / m_tot as f64
        );
    }
}

#[test]
#[ignore]
fn pilot_flags_and_ratios() {
    // Gauss fixed dataset.
    let d = gen_gauss(1000, 4, 1.0, 1).unwrap();
    let shards15 = partition_edges(&d.graph, 15, PartitionStrategy::Random, 2).unwrap();

    print!("blackboard r=18 flags: ");
    for seed in 1..=8u64 {
        let cfg = ProtocolConfig::new(4, seed)
            .with_mode(SamplingMode::Budget { c: 10.0 })
            .with_chain_rounds(18);
        let r = run_blackboard(&shards15, &cfg).unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();
    print!("blackboard r=5 flags:  ");
    for seed in 1..=8u64 {
        let cfg = ProtocolConfig::new(4, seed)
            .with_mode(SamplingMode::Budget { c: 10.0 })
            .with_chain_rounds(5);
        let r = run_blackboard(&shards15, &cfg).unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();

    print!("gauss mp c=10 s=15 flags: ");
    for seed in 1..=4u64 {
        let cfg = ProtocolConfig::new(4, seed).with_mode(SamplingMode::Budget { c: 10.0 });
        let r = run_msgpassing(&shards15, &cfg).unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();

    // Criterion 6 sweep: s in {2, 6, 18}.
    let base = run_baseline(&shards15, &ProtocolConfig::new(4, 3)).unwrap();
    println!("baseline bits = {}", base.ledger.total_bits());
    for s in [2usize, 6, 18] {
        let shards = partition_edges(&d.graph, s, PartitionStrategy::Random, 2).unwrap();
        let mp = run_msgpassing(
            &shards,
            &ProtocolConfig::new(4, 3).with_mode(SamplingMode::Budget { c: 5.0 }),
        )
        .unwrap();
        let bb = run_blackboard(
            &shards,
            &ProtocolConfig::new(4, 3)
                .with_mode(SamplingMode::Budget { c: 10.0 })
                .with_chain_rounds(18),
        )
        .unwrap();
        println!(
            "s={s}: mp bits={} bb bits={} mp/bb={:.2}",
            mp.ledger.total_bits(),
            bb.ledger.total_bits(),
            mp.ledger.total_bits() as f64 / bb.ledger.total_bits() as f64
        );
    }

    // Moons: fig-5 corner c=3 s=1 and c=10 s=15.
    let dm = gen_twomoons(1400, 0.1, 700, 1).unwrap();
    let m1 = partition_edges(&dm.graph, 1, PartitionStrategy::Random, 2).unwrap();
    print!("moons mp c=3 s=1 flags: ");
    for seed in 1..=5u64 {
        let r = run_msgpassing(
            &m1,
            &ProtocolConfig::new(2, seed).with_mode(SamplingMode::Budget { c: 3.0 }),
        )
        .unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();
    let m15 = partition_edges(&dm.graph, 15, PartitionStrategy::Random, 2).unwrap();
    print!("moons mp c=10 s=15 flags: ");
    for seed in 1..=3u64 {
        let r = run_msgpassing(
            &m15,
            &ProtocolConfig::new(2, seed).with_mode(SamplingMode::Budget { c: 10.0 }),
        )
        .unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();
    // Planted c=10 s=15.
    let dp = gen_planted(200, 4, 0.5, 0.01, 1).unwrap();
    let p15 = partition_edges(&dp.graph, 15, PartitionStrategy::Random, 2).unwrap();
    print!("planted mp c=10 s=15 flags: ");
    for seed in 1..=3u64 {
        let r = run_msgpassing(
            &p15,
            &ProtocolConfig::new(4, seed).with_mode(SamplingMode::Budget { c: 10.0 }),
        )
        .unwrap();
        print!("{}", if r.diverged { 'D' } else { '.' });
    }
    println!();
}
