//! Outer and inner bounds on the capacity region of a [`MultiInputPEC`].
//!
//! For a permutation `π^i` of the destinations on each subchannel `i`, the
//! degraded region requires a split `R_k = Σ_i R_{ik}` with
//!
//! ```text
//! Σ_j R_{i,π^i(j)} / (1 − ε_{i,π^i([j])}) ≤ 1      for every subchannel i
//! ```
//!
//! where `π^i([j]) = {π^i(1), …, π^i(j)}` is the nested prefix set. The outer
//! bound is the intersection of these regions over every permutation tuple
//! ([`TupleFamily::Independent`]) or over tuples that use one shared
//! permutation on all subchannels ([`TupleFamily::Shared`], a weaker bound).
//!
//! A prefix whose joint non-reception is 1 has no denominator; the rate it
//! would carry is pinned to zero instead.

use std::collections::HashMap;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::erasure::{DestSet, ErasureModel, MultiInputPEC};
use crate::error::{Error, Result};
use crate::lp::{split_rate, total_rate, ConstraintSystem, LpSolution, LpStatus, Mode, Relation, Row};
use crate::rational::{self, Rational};

pub const DEFAULT_TUPLE_CAP: u64 = 100_000;

/// Largest `K` for which the per-subchannel capacity-sum inner bound is
/// reported.
pub const CAPACITY_SUM_MAX_K: usize = 3;

/// One permutation of `{1..K}` per subchannel. `perms[i][j-1] = π^{i+1}(j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationTuple {
    perms: Vec<Vec<usize>>,
}

impl PermutationTuple {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        for p in &perms {
            let k = p.len();
            let mut seen = vec![false; k + 1];
            for &x in p {
                if x == 0 || x > k || seen[x] {
                    return Err(Error::InvalidModel(format!("{p:?} is not a permutation of 1..={k}")));
                }
                seen[x] = true;
            }
        }
        if perms.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(Error::InvalidModel("permutations disagree on K".into()));
        }
        Ok(PermutationTuple { perms })
    }

    /// The same permutation on all `m` subchannels.
    pub fn shared(m: usize, perm: Vec<usize>) -> Result<Self> {
        PermutationTuple::new(vec![perm; m])
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn is_shared(&self) -> bool {
        self.perms.windows(2).all(|w| w[0] == w[1])
    }
}

/// Which permutation tuples the outer bound intersects over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TupleFamily {
    /// Independent permutation per subchannel (the tighter bound).
    #[default]
    Independent,
    /// One permutation shared by all subchannels.
    Shared,
}

/// Destination weights `μ_1..μ_K`, any sign.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(pub Vec<Rational>);

impl WeightVector {
    pub fn ones(k: usize) -> Self {
        WeightVector(vec![Rational::one(); k])
    }

    /// `μ̃_k = max(μ_k, 0)`. Both regions are down-closed in the nonnegative
    /// orthant, so negative weights never help.
    pub fn clamped(&self) -> WeightVector {
        WeightVector(
            self.0
                .iter()
                .map(|w| if w.is_negative() { Rational::zero() } else { w.clone() })
                .collect(),
        )
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.0.len() != k {
            return Err(Error::InvalidModel(format!("weight vector has {} entries, expected {k}", self.0.len())));
        }
        Ok(())
    }
}

/// Row-stochastic time-sharing fractions `α_{ij}` (subchannel `i` gives a
/// fraction `α_{ij}` of its slots to destination `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeShareAllocation {
    alpha: Vec<Vec<Rational>>,
}

impl TimeShareAllocation {
    pub fn new(alpha: Vec<Vec<Rational>>) -> Result<Self> {
        for (i, row) in alpha.iter().enumerate() {
            if row.iter().any(|a| a.is_negative()) || row.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::InvalidModel(format!("time-sharing row {} is not a distribution", i + 1)));
            }
        }
        Ok(TimeShareAllocation { alpha })
    }

    /// `R_j = Σ_i α_{ij}(1 − ε_{ij})`.
    pub fn rates(&self, channel: &MultiInputPEC) -> Result<Vec<Rational>> {
        let k = channel.destinations();
        if self.alpha.len() != channel.subchannel_count() || self.alpha.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidModel("allocation shape does not match the channel".into()));
        }
        (1..=k)
            .map(|j| {
                let mut r = Rational::zero();
                for (i, row) in self.alpha.iter().enumerate() {
                    r += &row[j - 1] * (Rational::one() - channel.marginal_erasure(i + 1, j)?);
                }
                Ok(r)
            })
            .collect()
    }
}

/// Knobs shared by the bound computations.
#[derive(Clone, Copy, Debug)]
pub struct BoundOptions {
    pub mode: Mode,
    pub tuple_cap: u64,
    pub family: TupleFamily,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            mode: Mode::Exact,
            tuple_cap: DEFAULT_TUPLE_CAP,
            family: TupleFamily::Independent,
        }
    }
}

/// Coefficients of one subchannel's degraded row, indexed by destination:
/// `Some(1/(1-ε_prefix))`, or `None` when the rate is pinned to zero.
type DegradedRow = Vec<Option<Rational>>;

fn degraded_row(model: &ErasureModel, perm: &[usize]) -> DegradedRow {
    let mut row = vec![None; perm.len()];
    let mut prefix = DestSet::EMPTY;
    for &dest in perm {
        prefix = prefix.with(dest);
        let capacity = Rational::one() - model.non_reception(prefix);
        row[dest - 1] = (!capacity.is_zero()).then(|| capacity.recip());
    }
    row
}

fn rate_variables(sys: &mut ConstraintSystem, k: usize) -> Vec<usize> {
    (1..=k)
        .map(|j| sys.add_variable(total_rate(j), true).expect("fresh system"))
        .collect()
}

/// Adds split variables named by `name(i, k)`, one degraded block per
/// subchannel, and the coupling `R[k] = Σ_i split[i][k]`.
fn add_split_block(
    sys: &mut ConstraintSystem,
    totals: &[usize],
    rows: &[&DegradedRow],
    name: impl Fn(usize, usize) -> String,
) -> Result<()> {
    let k = totals.len();
    let mut split = Vec::with_capacity(rows.len());
    for i in 1..=rows.len() {
        let ids: Vec<usize> = (1..=k)
            .map(|j| sys.add_variable(name(i, j), true))
            .collect::<Result<_>>()?;
        split.push(ids);
    }
    for (ids, row) in split.iter().zip(rows) {
        let mut coeffs = Vec::new();
        for (j, c) in row.iter().enumerate() {
            match c {
                Some(c) => coeffs.push((ids[j], c.clone())),
                None => sys.add_row(Row::new([(ids[j], Rational::one())], Relation::Eq, Rational::zero()))?,
            }
        }
        if !coeffs.is_empty() {
            sys.add_row(Row::new(coeffs, Relation::Le, Rational::one()))?;
        }
    }
    for j in 0..k {
        let mut coeffs = vec![(totals[j], Rational::one())];
        coeffs.extend(split.iter().map(|ids| (ids[j], -Rational::one())));
        sys.add_row(Row::new(coeffs, Relation::Eq, Rational::zero()))?;
    }
    Ok(())
}

/// The degraded region `C_(π^1..π^M)` as a system over `R[k]` and `R[i][k]`.
pub fn degraded_region(channel: &MultiInputPEC, tuple: &PermutationTuple) -> Result<ConstraintSystem> {
    let k = channel.destinations();
    if tuple.perms.len() != channel.subchannel_count() || tuple.perms.iter().any(|p| p.len() != k) {
        return Err(Error::InvalidModel(format!(
            "tuple shape does not match a channel with M = {} and K = {k}",
            channel.subchannel_count()
        )));
    }
    let rows: Vec<DegradedRow> = channel
        .subchannels()
        .iter()
        .zip(&tuple.perms)
        .map(|(m, p)| degraded_row(m, p))
        .collect();
    let mut sys = ConstraintSystem::new();
    let totals = rate_variables(&mut sys, k);
    add_split_block(&mut sys, &totals, &rows.iter().collect::<Vec<_>>(), split_rate)?;
    Ok(sys)
}

/// Distinct degraded rows of one subchannel with a representative
/// permutation each.
#[derive(Clone, Debug)]
struct SubchannelRows {
    rows: Vec<DegradedRow>,
    reps: Vec<Vec<usize>>,
}

/// The deduplicated set of permutation tuples for a channel.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    per_sub: Vec<SubchannelRows>,
    combos: Vec<Vec<usize>>,
    total: u128,
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

impl TupleSpace {
    pub fn new(channel: &MultiInputPEC, family: TupleFamily, cap: u64) -> Result<Self> {
        let k = channel.destinations();
        let m = channel.subchannel_count();
        let perms: Vec<Vec<usize>> = (1..=k).permutations(k).collect();
        let mut per_sub = Vec::with_capacity(m);
        let mut row_of_perm = Vec::with_capacity(m);
        for model in channel.subchannels() {
            let mut seen: HashMap<DegradedRow, usize> = HashMap::new();
            let mut rows = SubchannelRows { rows: Vec::new(), reps: Vec::new() };
            let mut lookup = Vec::with_capacity(perms.len());
            for p in &perms {
                let row = degraded_row(model, p);
                let id = *seen.entry(row.clone()).or_insert_with(|| {
                    rows.rows.push(row);
                    rows.reps.push(p.clone());
                    rows.rows.len() - 1
                });
                lookup.push(id);
            }
            per_sub.push(rows);
            row_of_perm.push(lookup);
        }

        let (total, combos) = match family {
            TupleFamily::Shared => {
                let mut combos: Vec<Vec<usize>> = (0..perms.len())
                    .map(|p| row_of_perm.iter().map(|l| l[p]).collect())
                    .collect();
                let mut seen = std::collections::HashSet::new();
                combos.retain(|c| seen.insert(c.clone()));
                (factorial(k), combos)
            }
            TupleFamily::Independent => {
                let total = factorial(k).checked_pow(m as u32).unwrap_or(u128::MAX);
                let distinct: u128 = per_sub
                    .iter()
                    .try_fold(1u128, |acc, s| acc.checked_mul(s.rows.len() as u128))
                    .unwrap_or(u128::MAX);
                if distinct > cap as u128 {
                    return Err(Error::TupleCapExceeded { count: distinct, cap });
                }
                let combos = per_sub
                    .iter()
                    .map(|s| 0..s.rows.len())
                    .multi_cartesian_product()
                    .collect::<Vec<_>>();
                // multi_cartesian_product yields nothing for zero factors.
                let combos = if m == 0 { vec![Vec::new()] } else { combos };
                (total, combos)
            }
        };
        if combos.len() as u128 > cap as u128 {
            return Err(Error::TupleCapExceeded { count: combos.len() as u128, cap });
        }
        Ok(TupleSpace { per_sub, combos, total })
    }

    /// Number of structurally distinct tuples.
    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    /// Number of tuples before deduplication (`(K!)^M` or `K!`).
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn representative(&self, t: usize) -> PermutationTuple {
        PermutationTuple {
            perms: self.combos[t]
                .iter()
                .zip(&self.per_sub)
                .map(|(&r, s)| s.reps[r].clone())
                .collect(),
        }
    }

    fn rows(&self, t: usize) -> Vec<&DegradedRow> {
        self.combos[t]
            .iter()
            .zip(&self.per_sub)
            .map(|(&r, s)| &s.rows[r])
            .collect()
    }

    fn system_for(&self, k: usize, t: usize) -> ConstraintSystem {
        let mut sys = ConstraintSystem::new();
        let totals = rate_variables(&mut sys, k);
        add_split_block(&mut sys, &totals, &self.rows(t), split_rate).expect("well-formed block");
        sys
    }

    /// Joint system over `R[k]` with an independent split copy per listed
    /// tuple (`T<t>.R[i][k]`); feasible exactly on the intersection.
    fn joint_system(&self, k: usize, tuples: &[usize]) -> ConstraintSystem {
        let mut sys = ConstraintSystem::new();
        let totals = rate_variables(&mut sys, k);
        for &t in tuples {
            add_split_block(&mut sys, &totals, &self.rows(t), |i, j| format!("T{}.{}", t + 1, split_rate(i, j)))
                .expect("well-formed block");
        }
        sys
    }

    /// Feasibility of a split for fixed totals under tuple `t`.
    fn admits(&self, rates: &[Rational], t: usize, mode: Mode) -> Result<bool> {
        let k = rates.len();
        let mut sys = self.system_for(k, t);
        for (j, r) in rates.iter().enumerate() {
            sys.add_row(Row::new([(j, Rational::one())], Relation::Eq, r.clone()))?;
        }
        sys.is_feasible(mode)
    }
}

/// Every distinct degraded region of the outer bound.
#[derive(Clone, Debug)]
pub struct OuterBound {
    pub tuples_total: u128,
    pub systems: Vec<(PermutationTuple, ConstraintSystem)>,
}

/// Enumerates the outer-bound regions, one per structurally distinct tuple.
pub fn outer_bound_system(channel: &MultiInputPEC, opts: &BoundOptions) -> Result<OuterBound> {
    let space = TupleSpace::new(channel, opts.family, opts.tuple_cap)?;
    let k = channel.destinations();
    Ok(OuterBound {
        tuples_total: space.total(),
        systems: (0..space.len())
            .map(|t| (space.representative(t), space.system_for(k, t)))
            .collect(),
    })
}

/// The whole outer bound as one system: `R[k]` plus a split copy per
/// distinct tuple.
pub fn outer_joint_system(channel: &MultiInputPEC, opts: &BoundOptions) -> Result<ConstraintSystem> {
    let space = TupleSpace::new(channel, opts.family, opts.tuple_cap)?;
    let all: Vec<usize> = (0..space.len()).collect();
    Ok(space.joint_system(channel.destinations(), &all))
}

/// Result of a weighted-sum optimization over a region.
#[derive(Clone, Debug)]
pub struct WeightedBound {
    pub value: Rational,
    /// Optimal `R_1..R_K`.
    pub rates: Vec<Rational>,
    /// Distinct tuples whose constraints were in the final LP.
    pub tuples_in_lp: usize,
    /// Distinct tuples checked (all of them, for outer bounds).
    pub tuples_evaluated: usize,
    pub tuples_total: u128,
    /// The final LP (for dumps) and its solution.
    pub system: ConstraintSystem,
    pub solution: LpSolution,
}

fn optimal_rates(solution: &LpSolution, k: usize) -> Vec<Rational> {
    solution.assignment[..k].to_vec()
}

fn weighted_objective(sys: &ConstraintSystem, mu: &WeightVector) -> Vec<Rational> {
    let mut obj = vec![Rational::zero(); sys.variables().len()];
    obj[..mu.0.len()].clone_from_slice(&mu.0);
    obj
}

/// `max Σ μ_k R_k` over the outer bound.
///
/// Equivalent to one LP with a split copy per distinct tuple; solved by
/// adding tuples lazily: optimize over the tuples collected so far, then add
/// every tuple whose region excludes the optimum, until none does. The final
/// point lies in every region, so the relaxed optimum is the true one.
pub fn outer_max_weighted(channel: &MultiInputPEC, mu: &WeightVector, opts: &BoundOptions) -> Result<WeightedBound> {
    let k = channel.destinations();
    mu.check(k)?;
    let mu = mu.clamped();
    let space = TupleSpace::new(channel, opts.family, opts.tuple_cap)?;
    let mut working: Vec<usize> = vec![0];
    loop {
        let sys = space.joint_system(k, &working);
        let solution = sys.maximize(&weighted_objective(&sys, &mu), opts.mode)?;
        if solution.status != LpStatus::Optimal {
            return Err(Error::MalformedSystem(format!("outer-bound LP is {:?}", solution.status)));
        }
        let rates = optimal_rates(&solution, k);
        // The first violated tuple in enumeration order keeps the result
        // independent of scheduling.
        let violated = (0..space.len())
            .into_par_iter()
            .filter(|t| !working.contains(t))
            .map(|t| space.admits(&rates, t, opts.mode).map(|ok| (!ok).then_some(t)))
            .find_first(|r| !matches!(r, Ok(None)));
        let violated = match violated {
            None => None,
            Some(r) => r?,
        };
        let Some(violated) = violated else {
            return Ok(WeightedBound {
                value: solution.objective.clone().expect("optimal"),
                rates,
                tuples_in_lp: working.len(),
                tuples_evaluated: space.len(),
                tuples_total: space.total(),
                system: sys,
                solution,
            });
        };
        working.push(violated);
        working.sort_unstable();
    }
}

/// Whether `rates` lies in every degraded region of the outer bound.
pub fn outer_membership(channel: &MultiInputPEC, rates: &[Rational], opts: &BoundOptions) -> Result<bool> {
    Ok(outer_membership_report(channel, rates, opts)?.violated.is_none())
}

#[derive(Clone, Debug)]
pub struct MembershipReport {
    /// First tuple (in enumeration order) whose region excludes the point.
    pub violated: Option<PermutationTuple>,
    pub tuples_evaluated: usize,
    pub tuples_total: u128,
}

pub fn outer_membership_report(
    channel: &MultiInputPEC,
    rates: &[Rational],
    opts: &BoundOptions,
) -> Result<MembershipReport> {
    let k = channel.destinations();
    if rates.len() != k {
        return Err(Error::InvalidModel(format!("rate tuple has {} entries, expected {k}", rates.len())));
    }
    if rates.iter().any(|r| r.is_negative()) {
        return Err(Error::InvalidModel("rates must be nonnegative".into()));
    }
    let space = TupleSpace::new(channel, opts.family, opts.tuple_cap)?;
    let admitted = (0..space.len())
        .into_par_iter()
        .map(|t| space.admits(rates, t, opts.mode))
        .collect::<Result<Vec<bool>>>()?;
    Ok(MembershipReport {
        violated: admitted.iter().position(|ok| !ok).map(|t| space.representative(t)),
        tuples_evaluated: space.len(),
        tuples_total: space.total(),
    })
}

/// `Σ_i max_j μ̃_j (1 − ε_{ij})`: the best weighted sum under time sharing.
pub fn timesharing_functional(channel: &MultiInputPEC, mu: &WeightVector) -> Result<Rational> {
    let k = channel.destinations();
    mu.check(k)?;
    let mu = mu.clamped();
    let mut total = Rational::zero();
    for i in 1..=channel.subchannel_count() {
        let mut best = Rational::zero();
        for j in 1..=k {
            let v = &mu.0[j - 1] * (Rational::one() - channel.marginal_erasure(i, j)?);
            if v > best {
                best = v;
            }
        }
        total += best;
    }
    Ok(total)
}

/// Time-sharing region over `R[k]` and allocation variables `A[i][k]`:
/// `R_k ≤ Σ_i α_{ik}(1 − ε_{ik})`, `Σ_k α_{ik} = 1`.
pub fn timesharing_region(channel: &MultiInputPEC) -> Result<ConstraintSystem> {
    let k = channel.destinations();
    let m = channel.subchannel_count();
    let mut sys = ConstraintSystem::new();
    let totals = rate_variables(&mut sys, k);
    let mut alpha = Vec::with_capacity(m);
    for i in 1..=m {
        let ids: Vec<usize> = (1..=k)
            .map(|j| sys.add_variable(format!("A[{i}][{j}]"), true))
            .collect::<Result<_>>()?;
        sys.add_row(Row::new(ids.iter().map(|&v| (v, Rational::one())), Relation::Eq, Rational::one()))?;
        alpha.push(ids);
    }
    for j in 1..=k {
        let mut coeffs = vec![(totals[j - 1], Rational::one())];
        for (i, ids) in alpha.iter().enumerate() {
            coeffs.push((ids[j - 1], channel.marginal_erasure(i + 1, j)? - Rational::one()));
        }
        sys.add_row(Row::new(coeffs, Relation::Le, Rational::zero()))?;
    }
    Ok(sys)
}

/// LP route to the time-sharing optimum; takes the raw (possibly negative)
/// weights.
pub fn timesharing_lp(channel: &MultiInputPEC, mu: &WeightVector, mode: Mode) -> Result<WeightedBound> {
    mu.check(channel.destinations())?;
    let sys = timesharing_region(channel)?;
    solve_region(sys, mu, channel.destinations(), mode)
}

fn solve_region(sys: ConstraintSystem, mu: &WeightVector, k: usize, mode: Mode) -> Result<WeightedBound> {
    let solution = sys.maximize(&weighted_objective(&sys, mu), mode)?;
    if solution.status != LpStatus::Optimal {
        return Err(Error::MalformedSystem(format!("region LP is {:?}", solution.status)));
    }
    Ok(WeightedBound {
        value: solution.objective.clone().expect("optimal"),
        rates: optimal_rates(&solution, k),
        tuples_in_lp: 0,
        tuples_evaluated: 0,
        tuples_total: 0,
        system: sys,
        solution,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InnerMode {
    /// Minkowski sum of each subchannel's own feedback capacity region
    /// (exact for `K ≤ 3`).
    #[default]
    CapacitySum,
    /// Time sharing among destinations on each subchannel (any `K`).
    TimeSharing,
}

/// Inner bound without coding across subchannels.
pub fn inner_bound_system(channel: &MultiInputPEC, mode: InnerMode) -> Result<ConstraintSystem> {
    let k = channel.destinations();
    match mode {
        InnerMode::TimeSharing => timesharing_region(channel),
        InnerMode::CapacitySum => {
            if k > CAPACITY_SUM_MAX_K {
                return Err(Error::ModelRestriction(format!(
                    "the capacity-sum inner bound is only available for K <= {CAPACITY_SUM_MAX_K} (K = {k}); use the time-sharing inner bound instead"
                )));
            }
            let perms: Vec<Vec<usize>> = (1..=k).permutations(k).collect();
            let mut sys = ConstraintSystem::new();
            let totals = rate_variables(&mut sys, k);
            let mut split = Vec::new();
            for i in 1..=channel.subchannel_count() {
                let ids: Vec<usize> = (1..=k)
                    .map(|j| sys.add_variable(split_rate(i, j), true))
                    .collect::<Result<_>>()?;
                let model = channel.subchannel(i)?;
                let mut seen = std::collections::HashSet::new();
                let mut pinned = std::collections::BTreeSet::new();
                for p in &perms {
                    let row = degraded_row(model, p);
                    if !seen.insert(row.clone()) {
                        continue;
                    }
                    let mut coeffs = Vec::new();
                    for (j, c) in row.iter().enumerate() {
                        match c {
                            Some(c) => coeffs.push((ids[j], c.clone())),
                            None => {
                                pinned.insert(ids[j]);
                            }
                        }
                    }
                    if !coeffs.is_empty() {
                        sys.add_row(Row::new(coeffs, Relation::Le, Rational::one()))?;
                    }
                }
                for v in pinned {
                    sys.add_row(Row::new([(v, Rational::one())], Relation::Eq, Rational::zero()))?;
                }
                split.push(ids);
            }
            for j in 0..k {
                let mut coeffs = vec![(totals[j], Rational::one())];
                coeffs.extend(split.iter().map(|ids| (ids[j], -Rational::one())));
                sys.add_row(Row::new(coeffs, Relation::Eq, Rational::zero()))?;
            }
            Ok(sys)
        }
    }
}

pub fn inner_max_weighted(
    channel: &MultiInputPEC,
    mu: &WeightVector,
    inner: InnerMode,
    mode: Mode,
) -> Result<WeightedBound> {
    mu.check(channel.destinations())?;
    let sys = inner_bound_system(channel, inner)?;
    solve_region(sys, &mu.clamped(), channel.destinations(), mode)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumRateGap {
    pub outer: Rational,
    pub inner: Rational,
    pub gap: Rational,
}

/// Maximum sum rate of the outer bound and of the capacity-sum inner bound.
pub fn sum_rate_gap(channel: &MultiInputPEC, opts: &BoundOptions) -> Result<SumRateGap> {
    let ones = WeightVector::ones(channel.destinations());
    let inner = inner_max_weighted(channel, &ones, InnerMode::CapacitySum, opts.mode)?.value;
    let outer = outer_max_weighted(channel, &ones, opts)?.value;
    let gap = &outer - &inner;
    Ok(SumRateGap { outer, inner, gap })
}

/// Summed single-permutation constraint for channels whose subchannels are
/// independent with the same per-destination erasures:
/// `Σ_j R_{π(j)} / (1 − Π_{l≤j} ε_{π(l)}) ≤ M`.
pub fn uniform_corollary_check(channel: &MultiInputPEC, rates: &[Rational], perm: &[usize]) -> Result<bool> {
    let k = channel.destinations();
    let eps = uniform_erasures(channel)?;
    PermutationTuple::new(vec![perm.to_vec()])?;
    if perm.len() != k || rates.len() != k {
        return Err(Error::InvalidModel(format!("expected {k} rates and a permutation of 1..={k}")));
    }
    let m = Rational::from_integer(channel.subchannel_count().into());
    let mut prefix = Rational::one();
    let mut lhs = Rational::zero();
    for &dest in perm {
        prefix *= &eps[dest - 1];
        let capacity = Rational::one() - &prefix;
        let r = &rates[dest - 1];
        if capacity.is_zero() {
            if !r.is_zero() {
                return Ok(false);
            }
        } else {
            lhs += r / capacity;
        }
    }
    Ok(lhs <= m)
}

fn uniform_erasures(channel: &MultiInputPEC) -> Result<Vec<Rational>> {
    let not_uniform = || Error::ModelRestriction("channel is not independent with identical erasures on every subchannel".into());
    let mut eps: Option<&Vec<Rational>> = None;
    for model in channel.subchannels() {
        match model {
            ErasureModel::Independent(e) => match eps {
                None => eps = Some(e),
                Some(prev) if prev == e => {}
                Some(_) => return Err(not_uniform()),
            },
            _ => return Err(not_uniform()),
        }
    }
    eps.cloned().ok_or_else(not_uniform)
}

/// Closed-form degraded-row value `Σ_j R_{π(j)}/(1−ε_{π([j])})` for one
/// subchannel; `None` when a pinned rate is nonzero.
pub fn degraded_row_value(model: &ErasureModel, perm: &[usize], split: &[Rational]) -> Option<Rational> {
    let row = degraded_row(model, perm);
    let mut total = Rational::zero();
    for (c, r) in row.iter().zip(split) {
        match c {
            Some(c) => total += c * r,
            None if !r.is_zero() => return None,
            None => {}
        }
    }
    Some(total)
}

pub fn format_value(r: &Rational) -> (String, f64) {
    (rational::format(r), rational::to_f64(r))
}
