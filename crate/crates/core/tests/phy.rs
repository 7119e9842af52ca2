mod common;

use num_complex::Complex64;
use rand::Rng;

use scp_bicm::constellation::{builtin_mapper, design_lbpm, make_psk, make_qam, LabelMap, LbpmOptions};
use scp_bicm::interleave::InterleaverSpec;
use scp_bicm::lifting::lift_peg;
use scp_bicm::phy::{awgn, bicm_id_receive, maxlog_demap, BpDecoder, BpOptions, ReceiverOptions, Transmitter};
use scp_bicm::protograph::BaseMatrix;
use scp_bicm::seeding::unit_rng;

use common::{brute_force_posterior, demap_oracle, tree_code};

#[test]
fn bp_matches_brute_force_on_a_tree() {
    let h = tree_code();
    let dec = BpDecoder::new(&h);
    let opts = BpOptions {
        max_iters: 30,
        early_stop: false,
        min_sum: false,
    };
    let mut rng = unit_rng(21, 0, 0);
    for _ in 0..200 {
        let channel: Vec<f64> = (0..10).map(|_| rng.random_range(-4.0..4.0)).collect();
        let out = dec.decode(&channel, &opts);
        let exact = brute_force_posterior(&h, &channel);
        for (g, e) in out.posterior.iter().zip(&exact) {
            assert!((g - e).abs() <= 1e-8 * e.abs().max(1.0), "{g} vs {e}");
        }
    }
}

#[test]
fn demapper_matches_oracle_on_ten_thousand_cases() {
    let mut rng = unit_rng(22, 0, 0);
    let constellations = [make_psk(3).unwrap(), make_qam(4).unwrap()];
    let mut cases = 0;
    for c in &constellations {
        let mut maps: Vec<LabelMap> = ["gray", "sp", "msew", "antigray"]
            .iter()
            .map(|n| builtin_mapper(n, c).unwrap())
            .collect();
        let quick = LbpmOptions {
            samples: 20_000,
            ..LbpmOptions::default()
        };
        maps.push(design_lbpm(c, 6.0, 1, &quick));
        for map in &maps {
            for _ in 0..1000 {
                let y = Complex64::new(rng.random_range(-1.6..1.6), rng.random_range(-1.6..1.6));
                let s2 = rng.random_range(0.01..1.5);
                let la: Vec<f64> = (0..c.bits()).map(|_| rng.random_range(-12.0..12.0)).collect();
                let got = maxlog_demap(c, map, y, s2, &la);
                let want = demap_oracle(c, map, y, s2, &la);
                for (g, w) in got.iter().zip(&want) {
                    // Same maxima, possibly summed in another order.
                    assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{g} vs {w}");
                }
                cases += 1;
            }
        }
    }
    assert!(cases >= 10_000);
}

#[test]
fn noiseless_loopback_reproduces_the_codeword() {
    let code = lift_peg(&BaseMatrix::regular_3_6(), 48, 5).unwrap();
    let c = make_psk(3).unwrap();
    let map = builtin_mapper("sp", &c).unwrap();
    let spec = InterleaverSpec::identity(code.len(), 3).unwrap();
    let tx = Transmitter::new(&code, &c, &map, &spec);
    let mut rng = unit_rng(23, 0, 0);
    for _ in 0..20 {
        let info: Vec<u8> = (0..code.info_len()).map(|_| rng.random_range(0..2u8)).collect();
        let word = code.encode(&info).unwrap();
        let y = tx.modulate(&word);
        let out = bicm_id_receive(&code, &c, &map, &spec, &y, 1e-4, &ReceiverOptions::default());
        assert_eq!(out.hard_bits, word);
        assert!(out.converged);
    }
}

#[test]
fn receiver_corrects_moderate_noise() {
    let code = lift_peg(&BaseMatrix::regular_3_6(), 300, 6).unwrap();
    let c = make_psk(3).unwrap();
    let map = builtin_mapper("gray", &c).unwrap();
    let spec = InterleaverSpec::random(code.len(), 3, 1).unwrap();
    let tx = Transmitter::new(&code, &c, &map, &spec);
    let mut rng = unit_rng(24, 0, 0);
    let info: Vec<u8> = (0..code.info_len()).map(|_| rng.random_range(0..2u8)).collect();
    let word = code.encode(&info).unwrap();
    // Eb/N0 = 6 dB at rate 1/2: well above the waterfall.
    let sigma2 = 1.0 / (2.0 * 1.5 * 10f64.powf(0.6));
    let y = awgn(&tx.modulate(&word), sigma2, &mut rng);
    let out = bicm_id_receive(&code, &c, &map, &spec, &y, sigma2, &ReceiverOptions::default());
    assert_eq!(out.hard_bits, word);
}
