//! Fixed-width sparse binary codes.
//!
//! An [`Sdr`] stores its active bits as a strictly ascending index list.
//! At ~2% sparsity this is far smaller than a dense mask, and overlap
//! reduces to a linear merge of two sorted lists.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sdr {
    width: u32,
    active: Vec<u32>,
}

impl Sdr {
    /// An all-zero code.
    pub fn empty(width: u32) -> Self {
        Self {
            width,
            active: Vec::new(),
        }
    }

    /// Builds a code from arbitrary-order indices. Duplicates and
    /// out-of-range indices are rejected.
    pub fn from_indices(width: u32, indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut active: Vec<u32> = indices.into_iter().collect();
        active.sort_unstable();
        for pair in active.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateIndex(pair[0]));
            }
        }
        if let Some(&last) = active.last() {
            if last >= width {
                return Err(Error::IndexOutOfRange { index: last, width });
            }
        }
        Ok(Self { width, active })
    }

    /// Caller guarantees `active` is strictly ascending and `< width`.
    pub(crate) fn from_sorted_unchecked(width: u32, active: Vec<u32>) -> Self {
        debug_assert!(active.windows(2).all(|p| p[0] < p[1]));
        debug_assert!(active.last().is_none_or(|&i| i < width));
        Self { width, active }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    /// Number of active bits.
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.active.binary_search(&index).is_ok()
    }

    /// Size of the intersection of the two active sets, i.e. the dot
    /// product of the binary vectors.
    pub fn overlap(&self, other: &Sdr) -> Result<usize> {
        self.check_width(other)?;
        Ok(merge_count(&self.active, &other.active))
    }

    /// Set union of a non-empty list of equal-width codes.
    pub fn union<'a>(codes: impl IntoIterator<Item = &'a Sdr>) -> Result<Sdr> {
        let mut iter = codes.into_iter();
        let first = iter.next().ok_or(Error::EmptyUnion)?;
        let mut active = first.active.clone();
        for code in iter {
            first.check_width(code)?;
            active.extend_from_slice(&code.active);
        }
        active.sort_unstable();
        active.dedup();
        Ok(Sdr::from_sorted_unchecked(first.width, active))
    }

    /// Concatenates codes end to end, offsetting each by the widths
    /// before it.
    pub fn concat<'a>(codes: impl IntoIterator<Item = &'a Sdr>) -> Sdr {
        let mut width = 0u32;
        let mut active = Vec::new();
        for code in codes {
            active.extend(code.active.iter().map(|&i| i + width));
            width += code.width;
        }
        Sdr::from_sorted_unchecked(width, active)
    }

    fn check_width(&self, other: &Sdr) -> Result<()> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok(())
    }
}

fn merge_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `width:[i0,i1,...]`
impl fmt::Display for Sdr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.width)?;
        for (k, i) in self.active.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Sdr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected `width:[i,...]`, got `{s}`"));
        let (width, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let width: u32 = width.trim().parse().map_err(|_| bad())?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut indices = Vec::new();
        for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            indices.push(tok.parse::<u32>().map_err(|_| bad())?);
        }
        Sdr::from_indices(width, indices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sdr(width: u32, idx: &[u32]) -> Sdr {
        Sdr::from_indices(width, idx.iter().copied()).unwrap()
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(sdr(8, &[1, 2, 3]).overlap(&sdr(8, &[2, 3, 4])).unwrap(), 2);
        assert_eq!(sdr(8, &[]).overlap(&sdr(8, &[0, 1, 2, 3, 4, 5, 6, 7])).unwrap(), 0);
        let a = sdr(2048, &(0..40).map(|i| i * 50).collect::<Vec<_>>());
        assert_eq!(a.overlap(&a).unwrap(), 40);
    }

    #[test]
    fn overlap_width_mismatch() {
        assert!(matches!(
            sdr(8, &[1]).overlap(&sdr(16, &[1])),
            Err(Error::WidthMismatch { left: 8, right: 16 })
        ));
    }

    #[test]
    fn union_examples() {
        let u = Sdr::union([&sdr(8, &[1, 2]), &sdr(8, &[2, 3])]).unwrap();
        assert_eq!(u, sdr(8, &[1, 2, 3]));
        let v = sdr(8, &[0, 5]);
        assert_eq!(Sdr::union([&v]).unwrap(), v);
        assert!(matches!(Sdr::union(std::iter::empty()), Err(Error::EmptyUnion)));
        assert!(Sdr::union([&sdr(8, &[1]), &sdr(9, &[1])]).is_err());
    }

    #[test]
    fn union_of_disjoint_codes_counts_every_bit() {
        let (k, w) = (7u32, 40u32);
        let codes: Vec<Sdr> = (0..k)
            .map(|c| sdr(2048, &(0..w).map(|j| c * w + j).collect::<Vec<_>>()))
            .collect();
        assert_eq!(Sdr::union(&codes).unwrap().len(), (k * w) as usize);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(matches!(
            Sdr::from_indices(4, [1, 1]),
            Err(Error::DuplicateIndex(1))
        ));
        assert!(matches!(
            Sdr::from_indices(4, [4]),
            Err(Error::IndexOutOfRange { index: 4, width: 4 })
        ));
    }

    #[test]
    fn debug_text_format() {
        let a = sdr(16, &[9, 0, 3]);
        assert_eq!(a.to_string(), "16:[0,3,9]");
        assert_eq!("16:[0,3,9]".parse::<Sdr>().unwrap(), a);
        assert_eq!("5:[]".parse::<Sdr>().unwrap(), Sdr::empty(5));
        assert!("16:[0,3,".parse::<Sdr>().is_err());
        assert!("x:[1]".parse::<Sdr>().is_err());
    }

    #[test]
    fn random_codes_rarely_collide() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut draw = || {
            let idx = sample(&mut rng, 2048, 40).into_iter().map(|i| i as u32);
            Sdr::from_indices(2048, idx).unwrap()
        };
        let max = (0..10_000)
            .map(|_| draw().overlap(&draw()).unwrap())
            .max()
            .unwrap();
        assert!(max < 20, "max overlap {max}");
    }

    fn arb_pair() -> impl Strategy<Value = (Sdr, Sdr)> {
        (1u32..200).prop_flat_map(|w| {
            let set = proptest::collection::btree_set(0..w, 0..(w as usize).min(40));
            (set.clone(), set).prop_map(move |(a, b)| {
                (
                    Sdr::from_indices(w, a).unwrap(),
                    Sdr::from_indices(w, b).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric((a, b) in arb_pair()) {
            prop_assert_eq!(a.overlap(&b).unwrap(), b.overlap(&a).unwrap());
            prop_assert!(a.overlap(&b).unwrap() <= a.len().min(b.len()));
        }

        #[test]
        fn union_contains_each_member((a, b) in arb_pair()) {
            let u = Sdr::union([&a, &b]).unwrap();
            prop_assert_eq!(a.overlap(&u).unwrap(), a.len());
            prop_assert_eq!(&Sdr::union([&b, &a]).unwrap(), &u);
            prop_assert_eq!(&Sdr::union([&u, &u]).unwrap(), &u);
        }

        #[test]
        fn text_round_trip((a, _b) in arb_pair()) {
            prop_assert_eq!(a.to_string().parse::<Sdr>().unwrap(), a);
        }
    }
}
