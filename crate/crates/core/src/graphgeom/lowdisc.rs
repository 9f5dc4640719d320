//! The additive-recurrence (R_d) low-discrepancy sequence.

/// Quasi-random points of `[0,1)^d`. Point `k` of seed `s` is
/// `frac(1/2 + (k + offset(s)) * alpha)` with `alpha_j = phi_d^-(j+1)` and
/// `phi_d` the positive root of `x^(d+1) = x + 1`.
#[derive(Clone, Debug)]
pub struct LowDiscrepancy {
    alpha: Vec<f64>,
    offset: u64,
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl LowDiscrepancy {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
        Self { alpha, offset: splitmix64(seed) >> 44 }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn point(&self, k: u64) -> Vec<f64> {
        let n = (k + self.offset) as f64;
        self.alpha.iter().map(|a| (0.5 + n * a).fract()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_in_one_dimension() {
        let s = LowDiscrepancy::new(1, 0);
        assert!((s.alpha[0] - 0.618_033_988_749_894_9).abs() < 1e-12);
    }

    #[test]
    fn equidistributed_mean() {
        let s = LowDiscrepancy::new(4, 7);
        let n = 20_000;
        let mut mean = [0.0; 4];
        for k in 0..n {
            for (m, x) in mean.iter_mut().zip(s.point(k)) {
                *m += x / n as f64;
            }
        }
        for m in mean {
            assert!((m - 0.5).abs() < 1e-3, "{m}");
        }
    }

    #[test]
    fn seeds_shift_the_sequence() {
        assert_ne!(LowDiscrepancy::new(2, 1).point(0), LowDiscrepancy::new(2, 2).point(0));
        assert_eq!(LowDiscrepancy::new(2, 1).point(5), LowDiscrepancy::new(2, 1).point(5));
    }
}
