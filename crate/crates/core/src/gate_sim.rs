//! Word-level simulation of voted 4x4 multipliers under stuck-at faults.
//!
//! Each function module computes an 8-bit product. Stuck-at faults force
//! individual output bits of individual modules, and the voter combines the
//! module words bit by bit:
//!
//! - NMR: `(M+1)/2`-of-`M` majority across every module.
//! - DMMR, [`Composition::AndOr`]: majority of the majority group AND the
//!   OR of the minority group, per bit.
//! - DMMR, [`Composition::Abstract`]: the majority-group vote is passed
//!   through only while at least one minority module is fault-free; with
//!   the whole minority group faulty the voter is treated as failed and
//!   drives the complement of that vote.
//!
//! With AND-OR voting a stuck-at-0 fault cannot corrupt a 0-valued bit (nor
//! stuck-at-1 a 1-valued bit), so some fault sets that the abstract model
//! counts as failures still produce correct words. Campaign reports make
//! that visible instead of masking it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{FaultPattern, Scheme, SchemeKind};

pub const WORD_BITS: u8 = 8;

/// Operand pairs swept by a campaign: every `(a, b)` with `a, b < 16`.
pub const OPERAND_PAIRS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleOutput(u8);

impl ModuleOutput {
    pub fn word(self) -> u8 {
        self.0
    }

    pub fn bit(self, index: u8) -> bool {
        self.0 >> index & 1 == 1
    }
}

/// Behavioral 4x4 multiplier.
pub fn multiply4x4(a: u8, b: u8) -> Result<ModuleOutput> {
    if a >= 16 || b >= 16 {
        return Err(Error::Domain(format!(
            "operands must be 4-bit, got ({a}, {b})"
        )));
    }
    Ok(ModuleOutput(a * b))
}

/// `(L+1)/2`-of-`L` majority over an odd number (at least 3) of inputs.
pub fn majority_vote(bits: &[bool]) -> Result<bool> {
    let len = bits.len();
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "majority voter needs an odd number of at least 3 inputs, got {len}"
        )));
    }
    Ok(bits.iter().filter(|&&b| b).count() > len / 2)
}

/// AND-OR DMMR voter for one output bit.
pub fn dmmr_vote_bit(majority_bits: &[bool], minority_bits: &[bool]) -> Result<bool> {
    if minority_bits.is_empty() {
        return Err(Error::Domain(
            "DMMR voter needs at least one minority input".into(),
        ));
    }
    Ok(majority_vote(majority_bits)? && minority_bits.iter().any(|&b| b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    #[default]
    AndOr,
    Abstract,
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Composition::AndOr => "and-or",
            Composition::Abstract => "abstract",
        })
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "and-or" => Ok(Composition::AndOr),
            "abstract" => Ok(Composition::Abstract),
            other => Err(Error::Format(format!(
                "unknown composition '{other}' (expected and-or or abstract)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "stuck-at-0", alias = "0", alias = "sa0")]
    StuckAt0,
    #[serde(rename = "stuck-at-1", alias = "1", alias = "sa1")]
    StuckAt1,
}

impl Polarity {
    pub fn value(self) -> bool {
        matches!(self, Polarity::StuckAt1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StuckFault {
    pub module: usize,
    pub bit: u8,
    pub polarity: Polarity,
}

impl StuckFault {
    pub fn new(module: usize, bit: u8, polarity: Polarity) -> Self {
        StuckFault {
            module,
            bit,
            polarity,
        }
    }

    /// All eight output bits of `module` forced to one polarity.
    pub fn whole_module(module: usize, polarity: Polarity) -> Vec<StuckFault> {
        (0..WORD_BITS)
            .map(|bit| StuckFault::new(module, bit, polarity))
            .collect()
    }

    fn check(&self, scheme: &Scheme) -> Result<()> {
        if self.module >= scheme.n_modules() {
            return Err(Error::Domain(format!(
                "fault on module {} but {scheme} has {} modules",
                self.module,
                scheme.n_modules()
            )));
        }
        if self.bit >= WORD_BITS {
            return Err(Error::Domain(format!(
                "fault on bit {} of an {WORD_BITS}-bit word",
                self.bit
            )));
        }
        Ok(())
    }
}

/// Whole-module stuck faults for every module in `pattern`.
pub fn whole_module_faults(pattern: &FaultPattern, polarity: Polarity) -> Vec<StuckFault> {
    pattern
        .indices()
        .flat_map(|m| StuckFault::whole_module(m, polarity))
        .collect()
}

/// A compiled fault set: per module, which bits are forced and to what.
#[derive(Debug, Clone)]
struct FaultMasks {
    /// bits forced to 0 are cleared by `and`, bits forced to 1 are set by `or`
    and: Vec<u8>,
    or: Vec<u8>,
    touched: u64,
}

impl FaultMasks {
    fn compile(scheme: &Scheme, faults: &[StuckFault]) -> Result<Self> {
        let m = scheme.n_modules();
        let mut masks = FaultMasks {
            and: vec![0xFF; m],
            or: vec![0; m],
            touched: 0,
        };
        for fault in faults {
            fault.check(scheme)?;
            let bit = 1u8 << fault.bit;
            match fault.polarity {
                Polarity::StuckAt0 => {
                    masks.and[fault.module] &= !bit;
                    masks.or[fault.module] &= !bit;
                }
                Polarity::StuckAt1 => masks.or[fault.module] |= bit,
            }
            masks.touched |= 1 << fault.module;
        }
        Ok(masks)
    }

    fn apply(&self, module: usize, word: u8) -> u8 {
        (word & self.and[module]) | self.or[module]
    }
}

fn vote_words(scheme: &Scheme, words: &[u8], composition: Composition, masks: &FaultMasks) -> u8 {
    let k = scheme.majority_size();
    let threshold = scheme.majority_threshold();
    let minority = scheme.full_mask() & !scheme.majority_mask();
    let minority_trusted = masks.touched & minority != minority;
    let mut out = 0u8;
    for bit in 0..WORD_BITS {
        let ones = words[..k].iter().filter(|&&w| w >> bit & 1 == 1).count();
        let majority = ones >= threshold;
        let voted = match (scheme.kind(), composition) {
            (SchemeKind::Nmr, _) => majority,
            (SchemeKind::Dmmr, Composition::AndOr) => {
                majority && words[k..].iter().any(|&w| w >> bit & 1 == 1)
            }
            (SchemeKind::Dmmr, Composition::Abstract) => majority == minority_trusted,
        };
        out |= (voted as u8) << bit;
    }
    out
}

fn run_compiled(
    scheme: &Scheme,
    a: u8,
    b: u8,
    masks: &FaultMasks,
    composition: Composition,
) -> Result<u8> {
    let golden = multiply4x4(a, b)?.word();
    let words: Vec<u8> = (0..scheme.n_modules())
        .map(|m| masks.apply(m, golden))
        .collect();
    Ok(vote_words(scheme, &words, composition, masks))
}

/// Voted output word of the redundant system for one operand pair, using
/// the default AND-OR composition for DMMR.
pub fn run_voted_system(scheme: &Scheme, a: u8, b: u8, faults: &[StuckFault]) -> Result<u8> {
    run_voted_system_with(scheme, a, b, faults, Composition::AndOr)
}

pub fn run_voted_system_with(
    scheme: &Scheme,
    a: u8,
    b: u8,
    faults: &[StuckFault],
    composition: Composition,
) -> Result<u8> {
    let masks = FaultMasks::compile(scheme, faults)?;
    run_compiled(scheme, a, b, &masks, composition)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotedRun {
    pub scheme: Scheme,
    pub composition: Composition,
    pub faults: Vec<StuckFault>,
    pub inputs_swept: usize,
    pub mismatches: usize,
}

impl VotedRun {
    pub fn survived(&self) -> bool {
        self.mismatches == 0
    }
}

/// Sweeps all 256 operand pairs with a fixed fault set.
pub fn fault_campaign(
    scheme: &Scheme,
    faults: &[StuckFault],
    composition: Composition,
) -> Result<VotedRun> {
    let masks = FaultMasks::compile(scheme, faults)?;
    let mut mismatches = 0;
    for a in 0..16u8 {
        for b in 0..16u8 {
            if run_compiled(scheme, a, b, &masks, composition)? != a * b {
                mismatches += 1;
            }
        }
    }
    Ok(VotedRun {
        scheme: *scheme,
        composition,
        faults: faults.to_vec(),
        inputs_swept: OPERAND_PAIRS,
        mismatches,
    })
}

/// Bit selector in a campaign file: a single bit or `"all"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BitSelector {
    Bit(u8),
    All(AllBits),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllBits {
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEntry {
    pub module: usize,
    pub bit: BitSelector,
    pub polarity: Polarity,
}

/// Campaign description file:
/// `{scheme, composition: "and-or"|"abstract", faults: [{module, bit|"all", polarity}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub scheme: Scheme,
    #[serde(default)]
    pub composition: Composition,
    #[serde(default)]
    pub faults: Vec<FaultEntry>,
}

impl CampaignSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("campaign spec: {e}")))
    }

    pub fn stuck_faults(&self) -> Vec<StuckFault> {
        self.faults
            .iter()
            .flat_map(|entry| match entry.bit {
                BitSelector::Bit(bit) => vec![StuckFault::new(entry.module, bit, entry.polarity)],
                BitSelector::All(_) => StuckFault::whole_module(entry.module, entry.polarity),
            })
            .collect()
    }

    pub fn run(&self) -> Result<VotedRun> {
        fault_campaign(&self.scheme, &self.stuck_faults(), self.composition)
    }
}
