//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator. Unlike plain Kahan summation it also
/// tracks compensation when the incoming term is larger than the running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_total(terms: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &t in terms {
        acc.add(t);
    }
    acc.value()
}
