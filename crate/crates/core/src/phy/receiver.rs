//! Transmitter and BICM-ID receiver for one lifted code, labeling and
//! interleaver.

use num_complex::Complex64;

use super::bp::{BpDecoder, BpOptions};
use super::demap::Demapper;
use crate::constellation::{Constellation, LabelMap};
use crate::interleave::InterleaverSpec;
use crate::lifting::LiftedCode;

/// Codeword positions that are actually sent, in codeword order.
fn transmitted_bits(code: &LiftedCode) -> Vec<usize> {
    (0..code.len()).filter(|&b| !code.is_punctured_bit(b)).collect()
}

#[derive(Debug, Clone)]
pub struct Transmitter<'a> {
    code: &'a LiftedCode,
    demapper: Demapper,
    interleaver: &'a InterleaverSpec,
    tx: Vec<usize>,
}

impl<'a> Transmitter<'a> {
    pub fn new(code: &'a LiftedCode, c: &Constellation, map: &LabelMap, interleaver: &'a InterleaverSpec) -> Self {
        let tx = transmitted_bits(code);
        assert_eq!(
            tx.len(),
            interleaver.len(),
            "interleaver must cover the transmitted bits"
        );
        Self {
            code,
            demapper: Demapper::new(c, map),
            interleaver,
            tx,
        }
    }

    /// Symbols carrying an already encoded codeword.
    pub fn modulate(&self, codeword: &[u8]) -> Vec<Complex64> {
        let sent: Vec<u8> = self.tx.iter().map(|&b| codeword[b]).collect();
        let stream = self.interleaver.apply(&sent).expect("length checked at construction");
        stream
            .chunks(self.demapper.bits_per_symbol())
            .map(|bits| self.demapper.modulate(bits))
            .collect()
    }

    pub fn code(&self) -> &LiftedCode {
        self.code
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverOptions {
    /// Maximum demapper/decoder rounds.
    pub outer_iters: usize,
    /// Maximum BP iterations per round.
    pub inner_iters: usize,
    pub early_stop: bool,
    pub min_sum: bool,
    /// Keep check-to-variable messages between rounds instead of
    /// restarting the decoder.
    pub keep_decoder_state: bool,
}

impl Default for ReceiverOptions {
    fn default() -> Self {
        Self {
            outer_iters: 8,
            inner_iters: 25,
            early_stop: true,
            min_sum: false,
            keep_decoder_state: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveOutput {
    pub hard_bits: Vec<u8>,
    pub outer_iters_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct Receiver<'a> {
    code: &'a LiftedCode,
    demapper: Demapper,
    interleaver: &'a InterleaverSpec,
    decoder: BpDecoder,
    tx: Vec<usize>,
    constellation_size: usize,
}

impl<'a> Receiver<'a> {
    pub fn new(code: &'a LiftedCode, c: &Constellation, map: &LabelMap, interleaver: &'a InterleaverSpec) -> Self {
        let tx = transmitted_bits(code);
        assert_eq!(
            tx.len(),
            interleaver.len(),
            "interleaver must cover the transmitted bits"
        );
        Self {
            code,
            demapper: Demapper::new(c, map),
            interleaver,
            decoder: BpDecoder::new(code.parity_check()),
            tx,
            constellation_size: c.size(),
        }
    }

    pub fn receive(&self, y: &[Complex64], sigma2: f64, opts: &ReceiverOptions) -> ReceiveOutput {
        let m = self.demapper.bits_per_symbol();
        let n_tx = self.tx.len();
        assert_eq!(y.len() * m, n_tx);
        let mut apriori = vec![0.0; n_tx];
        let mut extrinsic = vec![0.0; n_tx];
        let mut scratch = vec![0.0; self.constellation_size];
        let mut deint = vec![0.0; n_tx];
        let mut channel = vec![0.0; self.code.len()];
        let mut c2v = vec![0.0; self.decoder.num_edges()];
        let mut fed_back = vec![0.0; n_tx];
        let bp = BpOptions {
            max_iters: opts.inner_iters,
            early_stop: opts.early_stop,
            min_sum: opts.min_sum,
        };
        let mut hard = vec![0u8; self.code.len()];
        let mut converged = false;
        let mut used = 0;
        for round in 0..opts.outer_iters.max(1) {
            used = round + 1;
            for (s, &ys) in y.iter().enumerate() {
                self.demapper.demap(
                    ys,
                    sigma2,
                    &apriori[s * m..(s + 1) * m],
                    &mut extrinsic[s * m..(s + 1) * m],
                    &mut scratch,
                );
            }
            self.interleaver.deinterleave_into(&extrinsic, &mut deint);
            for (&b, &l) in self.tx.iter().zip(&deint) {
                channel[b] = l;
            }
            if !opts.keep_decoder_state {
                c2v.iter_mut().for_each(|x| *x = 0.0);
            }
            let out = self.decoder.decode_from(&channel, &bp, &mut c2v);
            hard = out.hard_bits;
            converged = out.converged;
            if converged && opts.early_stop {
                break;
            }
            for (f, &b) in fed_back.iter_mut().zip(&self.tx) {
                *f = out.extrinsic[b];
            }
            self.interleaver.apply_into(&fed_back, &mut apriori);
        }
        ReceiveOutput {
            hard_bits: hard,
            outer_iters_used: used,
            converged,
        }
    }
}

/// One-shot form of [`Receiver::receive`].
pub fn bicm_id_receive(
    code: &LiftedCode,
    c: &Constellation,
    map: &LabelMap,
    interleaver: &InterleaverSpec,
    y: &[Complex64],
    sigma2: f64,
    opts: &ReceiverOptions,
) -> ReceiveOutput {
    Receiver::new(code, c, map, interleaver).receive(y, sigma2, opts)
}
