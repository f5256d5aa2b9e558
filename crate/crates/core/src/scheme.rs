//! Redundancy schemes and the operability predicate.
//!
//! Module indices follow one convention everywhere in the crate: for a
//! K-of-M DMMR scheme, indices `0..K` form the majority logic group and
//! `K..M` the minority logic group. NMR schemes have a single group.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest module count accepted by exhaustive enumeration routines.
pub const ENUMERATION_LIMIT: usize = 24;

/// Largest module count a [`Scheme`] may have; fault patterns are `u64` masks.
pub const MAX_MODULES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Nmr,
    Dmmr,
}

/// A redundancy topology: NMR(N) or K-of-M DMMR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    kind: SchemeKind,
    n_modules: usize,
    majority_size: usize,
}

impl Scheme {
    /// N-modular redundancy with `n` modules and an `(n+1)/2`-of-`n` voter.
    pub fn nmr(n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidScheme(format!(
                "NMR needs an odd module count of at least 3, got {n}"
            )));
        }
        check_size(n)?;
        Ok(Scheme {
            kind: SchemeKind::Nmr,
            n_modules: n,
            majority_size: n,
        })
    }

    /// K-of-M DMMR: `k` modules in the majority group, `m - k` in the minority group.
    pub fn dmmr(k: usize, m: usize) -> Result<Self> {
        if k < 3 || k.is_multiple_of(2) {
            return Err(Error::InvalidScheme(format!(
                "DMMR majority group size must be odd and at least 3, got {k}"
            )));
        }
        if k >= m {
            return Err(Error::InvalidScheme(format!(
                "DMMR needs a non-empty minority group (K < M), got {k}-of-{m}"
            )));
        }
        check_size(m)?;
        Ok(Scheme {
            kind: SchemeKind::Dmmr,
            n_modules: m,
            majority_size: k,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Total module count M.
    pub fn n_modules(&self) -> usize {
        self.n_modules
    }

    /// Majority group size K. Equal to M for NMR.
    pub fn majority_size(&self) -> usize {
        self.majority_size
    }

    pub fn minority_size(&self) -> usize {
        self.n_modules - self.majority_size
    }

    /// Correct modules the majority voter needs within the majority group.
    pub fn majority_threshold(&self) -> usize {
        self.majority_size.div_ceil(2)
    }

    /// `(majority_indices, minority_indices)`.
    pub fn module_groups(&self) -> (Vec<usize>, Vec<usize>) {
        (
            (0..self.majority_size).collect(),
            (self.majority_size..self.n_modules).collect(),
        )
    }

    pub(crate) fn majority_mask(&self) -> u64 {
        low_bits(self.majority_size)
    }

    pub(crate) fn full_mask(&self) -> u64 {
        low_bits(self.n_modules)
    }

    /// Predicate on a raw faulty-module bitmask; the caller guarantees
    /// that no bit at or above `n_modules` is set.
    #[inline]
    pub(crate) fn is_operational_mask(&self, faulty: u64) -> bool {
        let maj = self.majority_mask();
        let faulty_major = (faulty & maj).count_ones() as usize;
        let majority_ok = self.majority_size - faulty_major >= self.majority_threshold();
        match self.kind {
            SchemeKind::Nmr => majority_ok,
            SchemeKind::Dmmr => {
                let faulty_minor = (faulty & !maj).count_ones() as usize;
                majority_ok && self.minority_size() > faulty_minor
            }
        }
    }

    /// Whether the system still produces the correct output with the given
    /// modules faulty (perfect voters assumed).
    pub fn is_operational(&self, pattern: &FaultPattern) -> Result<bool> {
        self.check_pattern(pattern)?;
        Ok(self.is_operational_mask(pattern.mask))
    }

    pub fn check_pattern(&self, pattern: &FaultPattern) -> Result<()> {
        match pattern.max_index() {
            Some(index) if index >= self.n_modules => Err(Error::InvalidPattern {
                index,
                n_modules: self.n_modules,
            }),
            _ => Ok(()),
        }
    }

    /// Fault tolerance found by exhaustive enumeration of every fault
    /// pattern, grouped by cardinality.
    pub fn tolerance_profile(&self) -> Result<ToleranceProfile> {
        self.check_enumerable()?;
        let m = self.n_modules;
        let mut all_survive = vec![true; m + 1];
        let mut any_survive = vec![false; m + 1];
        for mask in 0..=self.full_mask() {
            let size = mask.count_ones() as usize;
            if self.is_operational_mask(mask) {
                any_survive[size] = true;
            } else {
                all_survive[size] = false;
            }
        }
        let first_failing = all_survive
            .iter()
            .position(|ok| !ok)
            .expect("the all-faulty pattern is never operational");
        let max_tolerance = any_survive
            .iter()
            .rposition(|ok| *ok)
            .expect("the fault-free pattern is always operational");
        Ok(ToleranceProfile {
            guaranteed_tolerance: first_failing - 1,
            max_tolerance,
        })
    }

    /// The tolerance figures in closed form, used to cross-check
    /// [`Scheme::tolerance_profile`].
    pub fn closed_form_tolerance(&self) -> ToleranceProfile {
        let k = self.majority_size;
        match self.kind {
            SchemeKind::Nmr => ToleranceProfile {
                guaranteed_tolerance: (k - 1) / 2,
                max_tolerance: (k - 1) / 2,
            },
            SchemeKind::Dmmr => {
                let minority = self.minority_size();
                ToleranceProfile {
                    guaranteed_tolerance: k.div_ceil(2).min(minority) - 1,
                    max_tolerance: (k - 1) / 2 + (minority - 1),
                }
            }
        }
    }

    pub(crate) fn check_enumerable(&self) -> Result<()> {
        if self.n_modules > ENUMERATION_LIMIT {
            return Err(Error::UnsupportedSize {
                n_modules: self.n_modules,
                limit: ENUMERATION_LIMIT,
            });
        }
        Ok(())
    }

    /// Every valid scheme with at most `max_modules` modules and a majority
    /// group drawn from `dmmr_majorities`.
    pub fn all_up_to(max_modules: usize, dmmr_majorities: &[usize]) -> Vec<Scheme> {
        let mut out = Vec::new();
        for m in 3..=max_modules {
            if let Ok(s) = Scheme::nmr(m) {
                out.push(s);
            }
            for &k in dmmr_majorities {
                if let Ok(s) = Scheme::dmmr(k, m) {
                    out.push(s);
                }
            }
        }
        out
    }
}

fn check_size(m: usize) -> Result<()> {
    if m > MAX_MODULES {
        return Err(Error::InvalidScheme(format!(
            "at most {MAX_MODULES} modules are supported, got {m}"
        )));
    }
    Ok(())
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::Nmr => write!(f, "{}MR", self.n_modules),
            SchemeKind::Dmmr => write!(f, "{}-of-{}", self.majority_size, self.n_modules),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `7MR`, `3-of-6`, `NMR:7` and `DMMR:3:6`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim().to_ascii_lowercase();
        let syntax = || Error::SchemeSyntax(s.trim().to_string());
        let number = |t: &str| t.trim().parse::<usize>().map_err(|_| syntax());

        if let Some(rest) = text.strip_prefix("nmr:") {
            return Scheme::nmr(number(rest)?);
        }
        if let Some(rest) = text.strip_prefix("dmmr:") {
            let (k, m) = rest.split_once(':').ok_or_else(syntax)?;
            return Scheme::dmmr(number(k)?, number(m)?);
        }
        if let Some((k, m)) = text.split_once("-of-") {
            let m = m.strip_suffix(" dmmr").unwrap_or(m);
            return Scheme::dmmr(number(k)?, number(m)?);
        }
        if let Some(n) = text.strip_suffix("mr") {
            return Scheme::nmr(number(n)?);
        }
        Err(syntax())
    }
}

impl Serialize for Scheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The set of faulty modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FaultPattern {
    mask: u64,
}

impl FaultPattern {
    pub fn none() -> Self {
        FaultPattern { mask: 0 }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for index in indices {
            if index >= MAX_MODULES {
                return Err(Error::InvalidPattern {
                    index,
                    n_modules: MAX_MODULES,
                });
            }
            mask |= 1 << index;
        }
        Ok(FaultPattern { mask })
    }

    pub fn from_mask(mask: u64) -> Self {
        FaultPattern { mask }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index < MAX_MODULES && self.mask >> index & 1 == 1
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_MODULES).filter(|&i| self.contains(i))
    }

    pub fn is_subset_of(&self, other: &FaultPattern) -> bool {
        self.mask & !other.mask == 0
    }

    fn max_index(&self) -> Option<usize> {
        (self.mask != 0).then(|| 63 - self.mask.leading_zeros() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Every fault pattern of this size or smaller is survived.
    pub guaranteed_tolerance: usize,
    /// Some pattern of this size is survived; none larger is.
    pub max_tolerance: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(indices: &[usize]) -> FaultPattern {
        FaultPattern::from_indices(indices.iter().copied()).unwrap()
    }

    #[test]
    fn parses_short_and_long_forms() {
        assert_eq!("7MR".parse::<Scheme>().unwrap(), Scheme::nmr(7).unwrap());
        assert_eq!("9mr".parse::<Scheme>().unwrap(), Scheme::nmr(9).unwrap());
        assert_eq!("NMR:7".parse::<Scheme>().unwrap(), Scheme::nmr(7).unwrap());
        assert_eq!(
            "3-of-6".parse::<Scheme>().unwrap(),
            Scheme::dmmr(3, 6).unwrap()
        );
        assert_eq!(
            "5-OF-8".parse::<Scheme>().unwrap(),
            Scheme::dmmr(5, 8).unwrap()
        );
        assert_eq!(
            "dmmr:3:6".parse::<Scheme>().unwrap(),
            Scheme::dmmr(3, 6).unwrap()
        );
        assert_eq!(
            "5-of-7 DMMR".parse::<Scheme>().unwrap(),
            Scheme::dmmr(5, 7).unwrap()
        );
    }

    #[test]
    fn rejects_bad_schemes() {
        assert!(matches!(
            "8MR".parse::<Scheme>(),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            "1MR".parse::<Scheme>(),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            "4-of-7".parse::<Scheme>(),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            "3-of-3".parse::<Scheme>(),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            "1-of-3".parse::<Scheme>(),
            Err(Error::InvalidScheme(_))
        ));
        assert!(matches!(
            "tmr".parse::<Scheme>(),
            Err(Error::SchemeSyntax(_))
        ));
        assert!(matches!(
            "x-of-6".parse::<Scheme>(),
            Err(Error::SchemeSyntax(_))
        ));
    }

    #[test]
    fn display_round_trips() {
        for s in Scheme::all_up_to(12, &[3, 5, 7]) {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
    }

    #[test]
    fn operational_examples() {
        let nmr7 = Scheme::nmr(7).unwrap();
        assert!(nmr7.is_operational(&FaultPattern::none()).unwrap());

        let d36 = Scheme::dmmr(3, 6).unwrap();
        assert!(!d36.is_operational(&pattern(&[0, 1])).unwrap());

        let d57 = Scheme::dmmr(5, 7).unwrap();
        assert!(d57.is_operational(&pattern(&[0, 1, 5])).unwrap());
        assert!(!d57.is_operational(&pattern(&[5, 6])).unwrap());
    }

    #[test]
    fn out_of_range_pattern_is_rejected() {
        let s = Scheme::nmr(3).unwrap();
        assert_eq!(
            s.is_operational(&pattern(&[3])),
            Err(Error::InvalidPattern {
                index: 3,
                n_modules: 3
            })
        );
        assert!(FaultPattern::from_indices([64]).is_err());
    }

    #[test]
    fn groups() {
        assert_eq!(
            Scheme::nmr(3).unwrap().module_groups(),
            (vec![0, 1, 2], vec![])
        );
        assert_eq!(
            Scheme::dmmr(3, 6).unwrap().module_groups(),
            (vec![0, 1, 2], vec![3, 4, 5])
        );
        assert_eq!(
            Scheme::dmmr(5, 7).unwrap().module_groups(),
            (vec![0, 1, 2, 3, 4], vec![5, 6])
        );
    }

    #[test]
    fn tolerance_examples() {
        let tp = |s: &str| s.parse::<Scheme>().unwrap().tolerance_profile().unwrap();
        assert_eq!(
            tp("7MR"),
            ToleranceProfile {
                guaranteed_tolerance: 3,
                max_tolerance: 3
            }
        );
        assert_eq!(
            tp("5-of-8"),
            ToleranceProfile {
                guaranteed_tolerance: 2,
                max_tolerance: 4
            }
        );
        assert_eq!(
            tp("3-of-6"),
            ToleranceProfile {
                guaranteed_tolerance: 1,
                max_tolerance: 3
            }
        );
    }

    #[test]
    fn tolerance_matches_closed_form() {
        for s in Scheme::all_up_to(16, &[3, 5, 7, 9]) {
            assert_eq!(
                s.tolerance_profile().unwrap(),
                s.closed_form_tolerance(),
                "{s}"
            );
        }
    }

    #[test]
    fn tolerance_over_limit() {
        let s = Scheme::nmr(25).unwrap();
        assert_eq!(
            s.tolerance_profile(),
            Err(Error::UnsupportedSize {
                n_modules: 25,
                limit: ENUMERATION_LIMIT
            })
        );
    }
}
