//! Seeded outputs must not depend on the number of worker threads.

use scp_bicm::constellation::{builtin_mapper, capacity_sweep, make_psk, sigma2_from_esn0_db};
use scp_bicm::exit::{demapper_transfer_mc, probe, ExitOptions, ExitProblem};
use scp_bicm::harness::{run, with_workers, ExperimentConfig, ExperimentKind, Grid};
use scp_bicm::interleave::InterleaverSpec;
use scp_bicm::lifting::lift_peg;
use scp_bicm::phy::{ber_experiment, BerConfig, ReceiverOptions, StopRule};
use scp_bicm::protograph::BaseMatrix;

fn on<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    with_workers(workers, f).unwrap()
}

#[test]
fn capacity_and_transfer_are_worker_invariant() {
    let c = make_psk(3).unwrap();
    let maps = [builtin_mapper("sp", &c).unwrap(), builtin_mapper("gray", &c).unwrap()];
    let refs: Vec<_> = maps.iter().collect();
    let sweep = |w| on(w, || capacity_sweep(&c, &refs, &[0.0, 5.0], 30_000, 7));
    assert_eq!(sweep(1), sweep(4));

    let spec = InterleaverSpec::random(30, 3, 1).unwrap();
    let mc = |w| {
        on(w, || {
            demapper_transfer_mc(
                &c,
                &maps[0],
                &spec,
                sigma2_from_esn0_db(4.0),
                &[0.3, 0.5, 0.7],
                9_000,
                3,
            )
        })
    };
    assert_eq!(mc(1), mc(4));
}

#[test]
fn ber_is_worker_invariant() {
    let code = lift_peg(&BaseMatrix::regular_3_6(), 60, 2).unwrap();
    let c = make_psk(3).unwrap();
    let map = builtin_mapper("sp", &c).unwrap();
    let spec = InterleaverSpec::random(code.len(), 3, 1).unwrap();
    let cfg = BerConfig {
        ebn0_db: vec![2.0, 3.0],
        rate: 0.5,
        receiver: ReceiverOptions {
            outer_iters: 3,
            inner_iters: 10,
            ..ReceiverOptions::default()
        },
        stop: StopRule {
            bit_errors: 40,
            max_frames: 60,
        },
        seed: 5,
        batch: 7,
    };
    let strip = |w| {
        on(w, || ber_experiment(&code, &c, &map, &spec, &cfg))
            .into_iter()
            .map(|p| (p.ebn0_db, p.frames, p.bit_errors, p.frame_errors))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(1), strip(4));
}

#[test]
fn threshold_probe_is_worker_invariant() {
    let c = make_psk(3).unwrap();
    let problem = ExitProblem {
        base: BaseMatrix::regular_3_6(),
        constellation: c.clone(),
        map: builtin_mapper("sp", &c).unwrap(),
        interleaver: InterleaverSpec::random(30, 3, 1).unwrap(),
        rate: 0.5,
        options: ExitOptions {
            mc_symbols: 5_000,
            ..ExitOptions::default()
        },
    };
    let p = |w| on(w, || probe(&problem, 3.2, 3, 9).unwrap());
    assert_eq!(p(1), p(4));
    let r = |w| on(w, || problem.run(3.2, 9).unwrap());
    assert_eq!(r(1), r(4));
}

#[test]
fn recipe_csv_is_worker_invariant() {
    let mut cfg = ExperimentConfig::builtin("fig4a").unwrap();
    cfg.capacity.samples = 20_000;
    cfg.modulation.profile_samples = 20_000;
    cfg.channel.esn0_db = Grid::List(vec![0.0, 6.0]);
    let csv = |w| on(w, || run(&cfg, ExperimentKind::Capacity).unwrap()).tables[0].to_csv();
    assert_eq!(csv(1), csv(4));
}
