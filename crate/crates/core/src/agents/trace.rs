/// Entries whose magnitude falls below this are dropped from a trace.
///
/// Far above the subnormal range, so decayed entries never slow the
/// arithmetic, and far below anything that could affect a statistic.
pub const TRACE_FLOOR: f64 = 1e-100;

/// Accumulating eligibility trace with an explicit sorted support.
#[derive(Debug, Clone)]
pub struct Trace {
    z: Vec<f64>,
    support: Vec<usize>,
    scratch: Vec<usize>,
}

impl Trace {
    pub fn new(d: usize) -> Self {
        Self { z: vec![0.0; d], support: Vec::new(), scratch: Vec::new() }
    }

    /// `z <- decay * z + x` for a binary `x` given by sorted indices.
    pub fn decay_and_add(&mut self, decay: f64, x: &[usize]) {
        if decay == 0.0 {
            self.clear();
        } else {
            let z = &mut self.z;
            self.support.retain(|&i| {
                z[i] *= decay;
                if z[i].abs() < TRACE_FLOOR {
                    z[i] = 0.0;
                    false
                } else {
                    true
                }
            });
        }
        for &i in x {
            self.z[i] += 1.0;
        }
        // Merge the (sorted) new indices into the sorted support.
        self.scratch.clear();
        let (mut a, mut b) = (0, 0);
        while a < self.support.len() || b < x.len() {
            let next = match (self.support.get(a), x.get(b)) {
                (Some(&s), Some(&t)) if s == t => {
                    a += 1;
                    b += 1;
                    s
                }
                (Some(&s), Some(&t)) if s < t => {
                    a += 1;
                    s
                }
                (Some(_), Some(&t)) | (None, Some(&t)) => {
                    b += 1;
                    t
                }
                (Some(&s), None) => {
                    a += 1;
                    s
                }
                (None, None) => unreachable!(),
            };
            self.scratch.push(next);
        }
        std::mem::swap(&mut self.support, &mut self.scratch);
    }

    pub fn clear(&mut self) {
        for &i in &self.support {
            self.z[i] = 0.0;
        }
        self.support.clear();
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.z
    }

    /// Indices with nonzero entries, ascending.
    #[inline]
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + Clone + '_ {
        self.support.iter().map(|&i| (i, self.z[i]))
    }
}
