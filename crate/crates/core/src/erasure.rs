//! Multi-input broadcast packet-erasure channels.
//!
//! A [`MultiInputPEC`] is `M` parallel broadcast subchannels from one source to
//! the same `K` destinations. Each subchannel carries its own [`ErasureModel`];
//! erasures on different subchannels are independent. Destinations are
//! 1-indexed everywhere (`t_1 .. t_K`).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Default cap on `K`; joint tables and permutation enumeration are `O(2^K)`
/// and `O(K!)`.
pub const DEFAULT_MAX_DESTINATIONS: usize = 8;

/// Largest `K` representable by [`DestSet`].
pub const HARD_MAX_DESTINATIONS: usize = 32;

/// A subset of destinations `{1..K}` stored as a bitmask (bit `j-1` is `t_j`).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DestSet(u32);

impl DestSet {
    pub const EMPTY: DestSet = DestSet(0);

    pub fn from_bits(bits: u32) -> Self {
        DestSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `{1, .., k}`.
    pub fn full(k: usize) -> Self {
        if k >= 32 {
            DestSet(u32::MAX)
        } else {
            DestSet((1u32 << k) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        debug_assert!((1..=32).contains(&j));
        DestSet(1 << (j - 1))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(DestSet::EMPTY, |s, j| s.with(j))
    }

    pub fn with(self, j: usize) -> Self {
        DestSet(self.0 | DestSet::singleton(j).0)
    }

    pub fn contains(self, j: usize) -> bool {
        (1..=32).contains(&j) && self.0 & (1 << (j - 1)) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: DestSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: DestSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Destination indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=32).filter(move |&j| self.contains(j))
    }

    /// Every subset of `{1..k}`, in bitmask order.
    pub fn all_subsets(k: usize) -> impl Iterator<Item = DestSet> {
        (0..=DestSet::full(k).0 as u64).map(|b| DestSet(b as u32))
    }

    fn parse_key(key: &str) -> Result<DestSet> {
        let bad = || Error::Parse(format!("reception subset key {key:?} is not a sorted list like \"[1,2]\""));
        let inner = key
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut set = DestSet::EMPTY;
        let mut last = 0usize;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let j: usize = part.parse().map_err(|_| bad())?;
            if j == 0 || j > HARD_MAX_DESTINATIONS || j <= last {
                return Err(bad());
            }
            last = j;
            set = set.with(j);
        }
        Ok(set)
    }

    fn key(self) -> String {
        let items: Vec<String> = self.iter().map(|j| j.to_string()).collect();
        format!("[{}]", items.join(","))
    }
}

impl fmt::Debug for DestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, j) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        f.write_str("}")
    }
}

/// Erasure law of one broadcast subchannel.
#[derive(Clone, Debug, PartialEq)]
pub enum ErasureModel {
    /// Independent links with per-destination erasure probabilities `e_1..e_K`.
    Independent(Vec<Rational>),
    /// All links erased together with probability `e`.
    Identical(Rational),
    /// Distribution over reception subsets: `p(S)` is the probability that
    /// exactly the destinations in `S` receive the packet.
    Joint(BTreeMap<DestSet, Rational>),
}

impl ErasureModel {
    pub fn independent<I: IntoIterator<Item = Rational>>(eps: I) -> Self {
        ErasureModel::Independent(eps.into_iter().collect())
    }

    pub fn identical(eps: Rational) -> Self {
        ErasureModel::Identical(eps)
    }

    pub fn joint<I: IntoIterator<Item = (DestSet, Rational)>>(table: I) -> Self {
        let mut map = BTreeMap::new();
        for (s, p) in table {
            *map.entry(s).or_insert_with(Rational::zero) += p;
        }
        ErasureModel::Joint(map)
    }

    fn validate(&self, k: usize) -> Result<()> {
        match self {
            ErasureModel::Independent(eps) => {
                if eps.len() != k {
                    return Err(Error::InvalidModel(format!(
                        "independent model has {} erasure probabilities, expected {k}",
                        eps.len()
                    )));
                }
                eps.iter().try_for_each(rational::check_probability)
            }
            ErasureModel::Identical(e) => rational::check_probability(e),
            ErasureModel::Joint(table) => {
                let full = DestSet::full(k);
                let mut total = Rational::zero();
                for (s, p) in table {
                    if !s.is_subset_of(full) {
                        return Err(Error::InvalidModel(format!(
                            "reception subset {s:?} is not within destinations 1..={k}"
                        )));
                    }
                    rational::check_probability(p)?;
                    total += p;
                }
                if !total.is_one() {
                    return Err(Error::InvalidModel(format!(
                        "joint reception probabilities sum to {}, not 1",
                        rational::format(&total)
                    )));
                }
                Ok(())
            }
        }
    }

    /// Probability that no destination in `set` receives the packet.
    pub fn non_reception(&self, set: DestSet) -> Rational {
        if set.is_empty() {
            return Rational::one();
        }
        match self {
            ErasureModel::Independent(eps) => set.iter().map(|j| eps[j - 1].clone()).product(),
            ErasureModel::Identical(e) => e.clone(),
            ErasureModel::Joint(table) => table
                .iter()
                .filter(|(s, _)| !s.intersects(set))
                .map(|(_, p)| p.clone())
                .sum(),
        }
    }

    /// Lossless conversion to a reception-subset table over `{1..k}`.
    /// Zero-probability subsets are omitted.
    pub fn to_joint(&self, k: usize) -> BTreeMap<DestSet, Rational> {
        match self {
            ErasureModel::Joint(table) => table
                .iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(s, p)| (*s, p.clone()))
                .collect(),
            ErasureModel::Identical(e) => {
                let mut table = BTreeMap::new();
                let received = Rational::one() - e;
                if !e.is_zero() {
                    table.insert(DestSet::EMPTY, e.clone());
                }
                if !received.is_zero() {
                    *table.entry(DestSet::full(k)).or_insert_with(Rational::zero) += received;
                }
                table
            }
            ErasureModel::Independent(eps) => DestSet::all_subsets(k)
                .filter_map(|s| {
                    let p: Rational = (1..=k)
                        .map(|j| {
                            if s.contains(j) {
                                Rational::one() - &eps[j - 1]
                            } else {
                                eps[j - 1].clone()
                            }
                        })
                        .product();
                    (!p.is_zero()).then_some((s, p))
                })
                .collect(),
        }
    }

    fn sampler(&self, k: usize) -> SubchannelSampler {
        match self {
            ErasureModel::Independent(eps) => SubchannelSampler::Independent(
                eps.iter().map(|e| 1.0 - rational::to_f64(e)).collect(),
            ),
            ErasureModel::Identical(e) => {
                SubchannelSampler::Identical(1.0 - rational::to_f64(e), DestSet::full(k))
            }
            ErasureModel::Joint(table) => {
                let mut acc = 0.0;
                let mut cumulative = Vec::with_capacity(table.len());
                for (s, p) in table.iter().filter(|(_, p)| !p.is_zero()) {
                    acc += rational::to_f64(p);
                    cumulative.push((acc, *s));
                }
                SubchannelSampler::Joint(cumulative)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum SubchannelSampler {
    Independent(Vec<f64>),
    Identical(f64, DestSet),
    Joint(Vec<(f64, DestSet)>),
}

impl SubchannelSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DestSet {
        match self {
            SubchannelSampler::Independent(recv) => {
                let mut s = DestSet::EMPTY;
                for (idx, &p) in recv.iter().enumerate() {
                    if rng.random::<f64>() < p {
                        s = s.with(idx + 1);
                    }
                }
                s
            }
            SubchannelSampler::Identical(p, full) => {
                if rng.random::<f64>() < *p {
                    *full
                } else {
                    DestSet::EMPTY
                }
            }
            SubchannelSampler::Joint(cumulative) => {
                let total = cumulative.last().map_or(0.0, |c| c.0);
                let u = rng.random::<f64>() * total;
                cumulative
                    .iter()
                    .find(|(c, _)| u < *c)
                    .or(cumulative.last())
                    .map_or(DestSet::EMPTY, |(_, s)| *s)
            }
        }
    }
}

/// Which destinations received each subchannel's packet in one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceptionOutcome {
    pub received: Vec<DestSet>,
}

impl ReceptionOutcome {
    pub fn subchannel(&self, i: usize) -> DestSet {
        self.received[i - 1]
    }
}

/// `M` parallel broadcast erasure subchannels to `K` destinations.
#[derive(Clone, Debug)]
pub struct MultiInputPEC {
    k: usize,
    subchannels: Vec<ErasureModel>,
    samplers: Vec<SubchannelSampler>,
}

impl PartialEq for MultiInputPEC {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.subchannels == other.subchannels
    }
}

impl MultiInputPEC {
    pub fn new(k: usize, subchannels: Vec<ErasureModel>) -> Result<Self> {
        Self::with_limit(k, subchannels, DEFAULT_MAX_DESTINATIONS)
    }

    /// Like [`MultiInputPEC::new`] with an explicit cap on `K`.
    ///
    /// A channel with no subchannels is accepted; its capacity region is the
    /// origin. Cut reductions with an empty edge cut produce one.
    pub fn with_limit(k: usize, subchannels: Vec<ErasureModel>, max_k: usize) -> Result<Self> {
        let max_k = max_k.min(HARD_MAX_DESTINATIONS);
        if k == 0 {
            return Err(Error::InvalidModel("destination count K must be at least 1".into()));
        }
        if k > max_k {
            return Err(Error::InvalidModel(format!(
                "K = {k} exceeds the configured destination cap of {max_k}"
            )));
        }
        for (idx, model) in subchannels.iter().enumerate() {
            model
                .validate(k)
                .map_err(|e| Error::InvalidModel(format!("subchannel {}: {e}", idx + 1)))?;
        }
        let samplers = subchannels.iter().map(|m| m.sampler(k)).collect();
        Ok(MultiInputPEC {
            k,
            subchannels,
            samplers,
        })
    }

    /// The two-subchannel, two-destination channel used throughout the
    /// examples: subchannel 1 has independent links with erasure `eps1`,
    /// subchannel 2 erases both links together with probability `eps2`.
    pub fn xor_example(eps1: Rational, eps2: Rational) -> Result<Self> {
        MultiInputPEC::new(
            2,
            vec![
                ErasureModel::independent([eps1.clone(), eps1]),
                ErasureModel::identical(eps2),
            ],
        )
    }

    pub fn destinations(&self) -> usize {
        self.k
    }

    pub fn subchannel_count(&self) -> usize {
        self.subchannels.len()
    }

    pub fn subchannels(&self) -> &[ErasureModel] {
        &self.subchannels
    }

    pub fn subchannel(&self, i: usize) -> Result<&ErasureModel> {
        self.check_subchannel(i)?;
        Ok(&self.subchannels[i - 1])
    }

    fn check_subchannel(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.subchannels.len() {
            return Err(Error::IndexOutOfRange {
                what: "subchannel",
                index: i,
                max: self.subchannels.len(),
            });
        }
        Ok(())
    }

    fn check_set(&self, set: DestSet) -> Result<()> {
        if !set.is_subset_of(DestSet::full(self.k)) {
            let bad = set.iter().find(|&j| j > self.k).unwrap_or(0);
            return Err(Error::IndexOutOfRange {
                what: "destination",
                index: bad,
                max: self.k,
            });
        }
        Ok(())
    }

    /// `ε_{iA}`: probability that no destination in `set` receives subchannel
    /// `i`'s packet. Equals 1 for the empty set.
    pub fn joint_non_reception(&self, i: usize, set: DestSet) -> Result<Rational> {
        self.check_subchannel(i)?;
        self.check_set(set)?;
        Ok(self.subchannels[i - 1].non_reception(set))
    }

    /// `ε_{ij}`.
    pub fn marginal_erasure(&self, i: usize, j: usize) -> Result<Rational> {
        if j == 0 || j > self.k {
            return Err(Error::IndexOutOfRange {
                what: "destination",
                index: j,
                max: self.k,
            });
        }
        self.joint_non_reception(i, DestSet::singleton(j))
    }

    /// Draws one slot: each subchannel independently, each from its own law.
    pub fn sample_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> ReceptionOutcome {
        ReceptionOutcome {
            received: self.samplers.iter().map(|s| s.sample(rng)).collect(),
        }
    }

    /// Same channel with every subchannel rewritten as a joint table.
    pub fn to_joint(&self) -> MultiInputPEC {
        let subs = self
            .subchannels
            .iter()
            .map(|m| ErasureModel::Joint(m.to_joint(self.k)))
            .collect();
        MultiInputPEC::with_limit(self.k, subs, HARD_MAX_DESTINATIONS)
            .expect("conversion preserves validity")
    }

    /// Relabels destinations: new destination `j` is old destination `perm[j-1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<MultiInputPEC> {
        if perm.len() != self.k {
            return Err(Error::InvalidModel("relabeling must cover every destination".into()));
        }
        let map_set = |s: DestSet| DestSet::from_indices((1..=self.k).filter(|&j| s.contains(perm[j - 1])));
        let subs = self
            .subchannels
            .iter()
            .map(|m| match m {
                ErasureModel::Independent(eps) => {
                    ErasureModel::Independent(perm.iter().map(|&old| eps[old - 1].clone()).collect())
                }
                ErasureModel::Identical(e) => ErasureModel::Identical(e.clone()),
                ErasureModel::Joint(t) => {
                    ErasureModel::Joint(t.iter().map(|(s, p)| (map_set(*s), p.clone())).collect())
                }
            })
            .collect();
        MultiInputPEC::with_limit(self.k, subs, HARD_MAX_DESTINATIONS)
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec {
            k: self.k,
            subchannels: self
                .subchannels
                .iter()
                .map(|m| match m {
                    ErasureModel::Independent(eps) => SubchannelSpec::Independent {
                        eps: eps.iter().cloned().map(ProbText).collect(),
                    },
                    ErasureModel::Identical(e) => SubchannelSpec::Identical {
                        eps: ProbText(e.clone()),
                    },
                    ErasureModel::Joint(t) => SubchannelSpec::Joint { p: JointTable(t.clone()) },
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: ChannelSpec) -> Result<Self> {
        Self::from_spec_with_limit(spec, DEFAULT_MAX_DESTINATIONS)
    }

    pub fn from_spec_with_limit(spec: ChannelSpec, max_k: usize) -> Result<Self> {
        let subs = spec
            .subchannels
            .into_iter()
            .map(|s| match s {
                SubchannelSpec::Independent { eps } => {
                    ErasureModel::Independent(eps.into_iter().map(|p| p.0).collect())
                }
                SubchannelSpec::Identical { eps } => ErasureModel::Identical(eps.0),
                SubchannelSpec::Joint { p } => ErasureModel::Joint(p.0),
            })
            .collect();
        MultiInputPEC::with_limit(spec.k, subs, max_k)
    }

    /// Canonical channel-spec JSON (pretty-printed, exact fractions).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("channel spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ChannelSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_spec(spec)
    }
}

/// Serialized form of a [`MultiInputPEC`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub k: usize,
    pub subchannels: Vec<SubchannelSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum SubchannelSpec {
    Independent { eps: Vec<ProbText> },
    Identical { eps: ProbText },
    Joint { p: JointTable },
}

/// A probability written as a decimal/fraction string (or a JSON number);
/// always serialized as an exact fraction string.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbText(pub Rational);

impl Serialize for ProbText {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational::format(&self.0))
    }
}

impl<'de> Deserialize<'de> for ProbText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        let value = match Raw::deserialize(d)? {
            Raw::Text(t) => rational::parse(&t).map_err(de::Error::custom)?,
            Raw::Number(x) => rational::from_f64_decimal(x)
                .ok_or_else(|| de::Error::custom("probability must be finite"))?,
        };
        Ok(ProbText(value))
    }
}

/// Joint reception table keyed by sorted subset lists (`"[1,2]"`).
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable(pub BTreeMap<DestSet, Rational>);

impl Serialize for JointTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (set, p) in &self.0 {
            map.serialize_entry(&set.key(), &ProbText(p.clone()))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for JointTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, ProbText>::deserialize(d)?;
        let mut table = BTreeMap::new();
        for (key, p) in raw {
            let set = DestSet::parse_key(&key).map_err(de::Error::custom)?;
            if table.insert(set, p.0).is_some() {
                return Err(de::Error::custom(format!("duplicate reception subset {key:?}")));
            }
        }
        Ok(JointTable(table))
    }
}
