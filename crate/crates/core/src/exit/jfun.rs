//! The J-function: mutual information between a bit and a consistent
//! Gaussian LLR `N(±σ²/2, σ²)`, and its inverse.

use std::sync::OnceLock;

use super::ExitError;

const STEP: f64 = 0.002;
const SIGMA_MAX: f64 = 30.0;
/// Simpson intervals over ±`SPAN` standard deviations.
const INTERVALS: usize = 1200;
const SPAN: f64 = 10.0;
/// Largest MI accepted by the saturating inverse.
pub const MI_CEILING: f64 = 1.0 - 1e-12;

/// `log2(1 + e^{-x})` without overflow.
#[inline]
pub fn log2_one_plus_exp_neg(x: f64) -> f64 {
    let v = if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    };
    v / std::f64::consts::LN_2
}

/// Direct Simpson evaluation of the defining integral.
pub fn j_quadrature(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let mean = sigma * sigma / 2.0;
    let h = 2.0 * SPAN / INTERVALS as f64;
    let mut acc = 0.0;
    for k in 0..=INTERVALS {
        let z = -SPAN + k as f64 * h;
        let w = if k == 0 || k == INTERVALS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        acc += w * pdf * log2_one_plus_exp_neg(mean + sigma * z);
    }
    1.0 - acc * h / 3.0
}

#[derive(Debug)]
pub struct JTable {
    values: Vec<f64>,
}

impl JTable {
    fn build() -> Self {
        let n = (SIGMA_MAX / STEP).round() as usize;
        let mut values: Vec<f64> = (0..=n).map(|k| j_quadrature(k as f64 * STEP)).collect();
        // Quadrature rounding can leave tiny dips near 1; keep it monotone.
        for k in 1..values.len() {
            if values[k] < values[k - 1] {
                values[k] = values[k - 1];
            }
        }
        Self { values }
    }

    pub fn global() -> &'static JTable {
        static TABLE: OnceLock<JTable> = OnceLock::new();
        TABLE.get_or_init(JTable::build)
    }

    pub fn j(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let x = sigma / STEP;
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().expect("nonempty");
        }
        let t = x - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    /// Slope of the interpolant at `sigma`.
    fn slope(&self, sigma: f64) -> f64 {
        let k = ((sigma / STEP).floor() as usize).min(self.values.len() - 2);
        (self.values[k + 1] - self.values[k]) / STEP
    }

    pub fn j_inv(&self, mi: f64) -> Result<f64, ExitError> {
        if mi.is_nan() || mi >= 1.0 {
            return Err(ExitError::Domain(mi));
        }
        if mi <= 0.0 {
            return Ok(0.0);
        }
        let mut sigma = closed_form_inverse(mi).clamp(0.0, SIGMA_MAX);
        for _ in 0..3 {
            let slope = self.slope(sigma);
            if slope <= 0.0 {
                break;
            }
            sigma = (sigma - (self.j(sigma) - mi) / slope).clamp(0.0, SIGMA_MAX);
        }
        if (self.j(sigma) - mi).abs() > 1e-9 {
            sigma = self.bisect(mi);
        }
        Ok(sigma)
    }

    fn bisect(&self, mi: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, SIGMA_MAX);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.j(mid) < mi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Two-branch closed-form approximation of the inverse, used as the
/// starting point for Newton refinement.
fn closed_form_inverse(mi: f64) -> f64 {
    const A1: f64 = 1.09542;
    const B1: f64 = 0.214217;
    const C1: f64 = 2.33727;
    const A2: f64 = 0.706692;
    const B2: f64 = 0.386013;
    const C2: f64 = -1.75017;
    if mi <= 0.3646 {
        A1 * mi * mi + B1 * mi + C1 * mi.sqrt()
    } else {
        -A2 * (B2 * (1.0 - mi)).ln() - C2 * mi
    }
}

pub fn j_fun(sigma: f64) -> f64 {
    JTable::global().j(sigma)
}

pub fn j_inv(mi: f64) -> Result<f64, ExitError> {
    JTable::global().j_inv(mi)
}

/// Inverse that clamps its argument into `[0, MI_CEILING]`.
pub fn j_inv_sat(mi: f64) -> f64 {
    JTable::global()
        .j_inv(mi.clamp(0.0, MI_CEILING))
        .expect("clamped into the domain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_monotonicity() {
        assert_eq!(j_fun(0.0), 0.0);
        assert!(j_fun(10.0) > 0.999);
        let mut prev = 0.0;
        for k in 1..400 {
            let v = j_fun(k as f64 * 0.02);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn round_trip() {
        for k in 1..=80 {
            let s = k as f64 * 0.1;
            assert!((j_inv(j_fun(s)).unwrap() - s).abs() < 1e-3, "sigma {s}");
        }
        assert!(matches!(j_inv(1.0), Err(ExitError::Domain(_))));
        assert_eq!(j_inv(0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_is_close() {
        for mi in [0.05, 0.2, 0.5, 0.8, 0.95] {
            let exact = j_inv(mi).unwrap();
            assert!(
                (closed_form_inverse(mi) - exact).abs() < 0.05,
                "{mi}: {} vs {exact}",
                closed_form_inverse(mi)
            );
        }
    }
}
