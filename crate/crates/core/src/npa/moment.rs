//! Operator words and moment matrices.
//!
//! Generators are the outcome-0 projectors of each party and setting: `F`
//! for the hidden party (one setting) and `A0, A1, B0, B1` for the two
//! observers. Outcome-1 projectors are `1 − Π`, so they add no new moments.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Hidden,
    First,
    Second,
}

/// Outcome-0 projector of `party` at `setting`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub party: Party,
    pub setting: u8,
}

pub const F: Generator = Generator { party: Party::Hidden, setting: 0 };
pub const A0: Generator = Generator { party: Party::First, setting: 0 };
pub const A1: Generator = Generator { party: Party::First, setting: 1 };
pub const B0: Generator = Generator { party: Party::Second, setting: 0 };
pub const B1: Generator = Generator { party: Party::Second, setting: 1 };

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.party {
            Party::Hidden => write!(f, "F"),
            Party::First => write!(f, "A{}", self.setting),
            Party::Second => write!(f, "B{}", self.setting),
        }
    }
}

/// Product of generators, left to right.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OperatorWord(pub Vec<Generator>);

impl OperatorWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Groups letters by party (different parties commute) and collapses
    /// repeated adjacent letters (projector idempotence).
    pub fn canonical(&self) -> Self {
        let mut letters = self.0.clone();
        letters.sort_by_key(|g| g.party);
        letters.dedup();
        Self(letters)
    }

    /// Canonical form of the adjoint (generators are Hermitian).
    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().rev().copied().collect()).canonical()
    }

    /// Representative shared by `w` and `w†`; real moment matrices identify
    /// the two.
    pub fn moment_key(&self) -> Self {
        let c = self.canonical();
        let r = c.adjoint();
        c.min(r)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for g in &self.0 {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl Serialize for OperatorWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// The two observers only.
    ObserversOnly,
    /// Observers plus the hidden party holding `F`.
    HiddenParty,
}

/// Operator-word sets indexing the moment matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NpaLevel {
    One,
    /// Level 1 plus all products of two generators from different parties.
    OnePlusAB,
    Two,
    /// All words of length ≤ 3, hidden letters mixed in freely.
    Three,
    /// Observer words of length ≤ 3 plus the single letter `F`.
    ThreeIsolated,
}

impl NpaLevel {
    pub fn label(self) -> &'static str {
        match self {
            NpaLevel::One => "1",
            NpaLevel::OnePlusAB => "1+AB",
            NpaLevel::Two => "2",
            NpaLevel::Three => "3",
            NpaLevel::ThreeIsolated => "3-isolated",
        }
    }
}

impl fmt::Display for NpaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for NpaLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "1" => Ok(NpaLevel::One),
            "1+ab" => Ok(NpaLevel::OnePlusAB),
            "2" => Ok(NpaLevel::Two),
            "3" => Ok(NpaLevel::Three),
            "3-isolated" | "3i" => Ok(NpaLevel::ThreeIsolated),
            other => Err(format!("unknown level {other:?}; expected 1, 1+AB, 2, 3 or 3-isolated")),
        }
    }
}

impl Serialize for NpaLevel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

fn generators(scenario: Scenario) -> Vec<Generator> {
    match scenario {
        Scenario::ObserversOnly => vec![A0, A1, B0, B1],
        Scenario::HiddenParty => vec![F, A0, A1, B0, B1],
    }
}

/// Canonical words of length exactly `len` over `gens`, in generation order.
fn words_of_length(gens: &[Generator], len: usize, out: &mut Vec<OperatorWord>) {
    let mut stack: Vec<Vec<Generator>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &stack {
            for &g in gens {
                let mut v = w.clone();
                v.push(g);
                next.push(v);
            }
        }
        stack = next;
    }
    for w in stack {
        let c = OperatorWord(w).canonical();
        if c.len() == len && !out.contains(&c) {
            out.push(c);
        }
    }
}

/// Index words for `level` in `scenario`, identity first.
pub fn index_words(level: NpaLevel, scenario: Scenario) -> Vec<OperatorWord> {
    let gens = generators(scenario);
    let mut out = vec![OperatorWord::identity()];
    match level {
        NpaLevel::One => words_of_length(&gens, 1, &mut out),
        NpaLevel::OnePlusAB => {
            words_of_length(&gens, 1, &mut out);
            for (i, &g) in gens.iter().enumerate() {
                for &h in &gens[i + 1..] {
                    if g.party != h.party {
                        let w = OperatorWord(vec![g, h]).canonical();
                        if !out.contains(&w) {
                            out.push(w);
                        }
                    }
                }
            }
        }
        NpaLevel::Two | NpaLevel::Three => {
            let k = if level == NpaLevel::Two { 2 } else { 3 };
            for len in 1..=k {
                words_of_length(&gens, len, &mut out);
            }
        }
        NpaLevel::ThreeIsolated => {
            let observers = generators(Scenario::ObserversOnly);
            if scenario == Scenario::HiddenParty {
                out.push(OperatorWord(vec![F]));
            }
            for len in 1..=3 {
                words_of_length(&observers, len, &mut out);
            }
        }
    }
    out
}

/// `Γ_ij = ⟨w_i† w_j⟩` with entries grouped into classes of equal moments.
#[derive(Clone, Debug, Serialize)]
pub struct MomentMatrix {
    level: NpaLevel,
    #[serde(skip)]
    scenario: Scenario,
    words: Vec<OperatorWord>,
    classes: Vec<OperatorWord>,
    /// Row-major class id of every entry.
    index: Vec<usize>,
    #[serde(skip)]
    lookup: HashMap<OperatorWord, usize>,
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn level(&self) -> NpaLevel {
        self.level
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn words(&self) -> &[OperatorWord] {
        &self.words
    }

    /// Moment represented by each class.
    pub fn classes(&self) -> &[OperatorWord] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_at(&self, i: usize, j: usize) -> usize {
        self.index[i * self.size() + j]
    }

    /// Class holding the moment `⟨Π g⟩`, if it appears in the matrix.
    pub fn class_of(&self, gens: &[Generator]) -> Option<usize> {
        self.lookup.get(&OperatorWord(gens.to_vec()).moment_key()).copied()
    }

    pub fn identity_class(&self) -> usize {
        self.class_at(0, 0)
    }
}

/// Builds the moment matrix over [`index_words`] for `level`.
pub fn build_moment_matrix(level: NpaLevel, scenario: Scenario) -> MomentMatrix {
    let words = index_words(level, scenario);
    let n = words.len();
    let mut classes = Vec::new();
    let mut lookup = HashMap::new();
    let mut index = Vec::with_capacity(n * n);
    for wi in &words {
        let left = OperatorWord(wi.0.iter().rev().copied().collect());
        for wj in &words {
            let key = left.concat(wj).moment_key();
            let id = *lookup.entry(key.clone()).or_insert_with(|| {
                classes.push(key);
                classes.len() - 1
            });
            index.push(id);
        }
    }
    MomentMatrix { level, scenario, words, classes, index, lookup }
}
