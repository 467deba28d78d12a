//! Query sets over stream positions.

/// A set of stream positions stored as a bitmap over `[0, universe)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PositionBits {
    words: Vec<u64>,
    universe: usize,
}

impl PositionBits {
    pub fn new(universe: usize) -> Self {
        PositionBits {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn from_positions(universe: usize, positions: &[usize]) -> Self {
        let mut b = Self::new(universe);
        for &p in positions {
            b.insert(p);
        }
        b
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn insert(&mut self, p: usize) {
        assert!(p < self.universe, "position {p} outside universe {}", self.universe);
        self.words[p >> 6] |= 1 << (p & 63);
    }

    #[inline]
    pub fn remove(&mut self, p: usize) {
        if p < self.universe {
            self.words[p >> 6] &= !(1 << (p & 63));
        }
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        p < self.universe && self.words[p >> 6] >> (p & 63) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Overwrites `self` with `a & b`.
    pub fn assign_and(&mut self, a: &PositionBits, b: &PositionBits) {
        debug_assert_eq!(a.universe, b.universe);
        self.universe = a.universe;
        self.words.clear();
        self.words
            .extend(a.words.iter().zip(&b.words).map(|(x, y)| x & y));
    }

    /// Overwrites `self` with `a & !b`.
    pub fn assign_and_not(&mut self, a: &PositionBits, b: &PositionBits) {
        debug_assert_eq!(a.universe, b.universe);
        self.universe = a.universe;
        self.words.clear();
        self.words
            .extend(a.words.iter().zip(&b.words).map(|(x, y)| x & !y));
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }
}

/// The example set of one class-conditional query.
#[derive(Debug, Clone, Copy)]
pub enum QuerySet<'a> {
    /// Explicit positions; must be duplicate-free.
    Positions(&'a [usize]),
    /// A bitmap of positions.
    Bits(&'a PositionBits),
}

impl QuerySet<'_> {
    pub fn len(&self) -> usize {
        match self {
            QuerySet::Positions(p) => p.len(),
            QuerySet::Bits(b) => b.count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            QuerySet::Positions(p) => p.is_empty(),
            QuerySet::Bits(b) => b.is_empty(),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            QuerySet::Positions(p) => p.to_vec(),
            QuerySet::Bits(b) => b.iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_ops() {
        let a = PositionBits::from_positions(200, &[0, 5, 64, 130, 199]);
        let b = PositionBits::from_positions(200, &[5, 130, 131]);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 5, 64, 130, 199]);
        let mut c = PositionBits::default();
        c.assign_and(&a, &b);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![5, 130]);
        c.assign_and_not(&a, &b);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![0, 64, 199]);
        assert_eq!(c.count(), 3);
        c.remove(64);
        assert!(!c.contains(64));
        assert!(!c.contains(1000));
    }
}
