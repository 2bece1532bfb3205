//! Compensated summation.
//!
//! Every sum over SNPs in this crate goes through [`CompensatedSum`]
//! (Neumaier's variant of Kahan summation) in index order, so results are
//! reproducible and insensitive to the magnitude spread of the summands.

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Mean of a slice with compensated accumulation; `NaN` on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    csum(xs.iter().copied()) / xs.len() as f64
}

/// Sample variance (n - 1 denominator); `NaN` when fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    csum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64
}
