/// Square bit matrix packed row-major into exactly `ceil(n*n / 64)` words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        BitMatrix {
            n,
            words: vec![0; (n * n).div_ceil(64)],
        }
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Option<Self> {
        (words.len() == (n * n).div_ceil(64)).then_some(BitMatrix { n, words })
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Logical size in bits, `n²`.
    pub fn bits(&self) -> usize {
        self.n * self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.n && col < self.n);
        let bit = row * self.n + col;
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize) {
        debug_assert!(row < self.n && col < self.n);
        let bit = row * self.n + col;
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|a| (a + 1..self.n).all(|b| self.get(a, b) == self.get(b, a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_storage() {
        let mut m = BitMatrix::new(3);
        assert_eq!(m.words().len(), 1);
        assert_eq!(m.bits(), 9);
        m.set(0, 2);
        m.set(2, 0);
        m.set(1, 1);
        assert!(m.get(0, 2) && m.get(2, 0) && m.get(1, 1));
        assert!(!m.get(0, 1));
        assert!(m.is_symmetric());
        m.set(0, 1);
        assert!(!m.is_symmetric());

        let m = BitMatrix::new(9);
        assert_eq!(m.words().len(), 2);
    }
}
