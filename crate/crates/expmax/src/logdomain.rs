//! Log-domain arithmetic helpers.
//!
//! Every measure in this crate is carried as a natural log: the
//! counterexample sweeps need quantities like `e^{-s}` at `s ≈ 64` and
//! `e^{N}` at `N ≈ 64` in the same expression, which would under/overflow in
//! the linear domain.

/// `ln(1 - e^{-d})` for `d > 0`, stable for both tiny and large `d`.
pub fn ln_one_minus_exp_neg(d: f64) -> f64 {
    debug_assert!(d > 0.0);
    if d > std::f64::consts::LN_2 {
        (-(-d).exp()).ln_1p()
    } else {
        (-(-d).exp_m1()).ln()
    }
}

/// `ln(e^{-a} - e^{-b})` for `a < b`.
pub fn ln_exp_diff(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    -a + ln_one_minus_exp_neg(b - a)
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln Σ e^{v_i}` over a slice; `-∞` for an empty slice.
pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}
