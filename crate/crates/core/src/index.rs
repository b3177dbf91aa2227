//! Mixed-radix flattening. The first digit is the most significant, so
//! multi-round strings are round-major and multi-party tuples are party-major.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radix {
    sizes: Vec<usize>,
    total: usize,
}

impl Radix {
    pub fn new(sizes: Vec<usize>) -> Self {
        let total = sizes.iter().product();
        Self { sizes, total }
    }

    /// `n` copies of the same digit size.
    pub fn uniform(size: usize, n: usize) -> Self {
        Self::new(vec![size; n])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.sizes.len());
        digits
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&d, &s)| {
                debug_assert!(d < s);
                acc * s + d
            })
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = idx % s;
            idx /= s;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total).map(move |i| self.decode(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = Radix::new(vec![2, 3, 4]);
        assert_eq!(r.total(), 24);
        for i in 0..24 {
            assert_eq!(r.encode(&r.decode(i)), i);
        }
        assert_eq!(r.encode(&[1, 0, 0]), 12);
        assert_eq!(r.decode(5), vec![0, 1, 1]);
    }
}
