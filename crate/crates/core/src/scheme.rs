//! Monte Carlo simulation of the cross-subchannel coding scheme on the
//! two-subchannel example channel, and of its no-cross-coding baseline.
//!
//! Subchannel 1 serves `t1`'s packets for `N` slots, then `t2`'s for `N`
//! slots, resending a packet only when neither destination got it. Packets
//! that reached only the other destination form `P_1` (wanted by `t1`, held
//! by `t2`) and `P_2`. Each destination already holds the other's set, so a
//! random linear combination of `P_1 ∪ P_2` is useful to both. Such
//! combinations are sent on subchannel 2 in every slot and on both
//! subchannels in a final repair phase that lasts until both destinations
//! decode. Combinations sent on subchannel 2 during the first two phases are
//! formed after those phases end (block coding), when `P_1` and `P_2` are
//! known.
//!
//! Decoding works on generations of `generation` consecutive packets. The
//! sender tracks each destination's rank per generation from feedback and
//! aims every combination at the earliest generations still short of full
//! rank.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::erasure::MultiInputPEC;
use crate::error::{Error, Result};
use crate::gf::{Eliminator, Field};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub eps1: Rational,
    pub eps2: Rational,
    /// Slots per single-destination phase.
    pub n: usize,
    /// Field size for the combination coefficients.
    pub q: usize,
    pub seed: u64,
    pub trials: usize,
    /// Non-innovative receptions tolerated per generation before the trial
    /// counts as a decoding failure.
    pub rank_margin: usize,
    pub generation: usize,
    pub payload_len: usize,
}

impl SchemeConfig {
    pub fn new(eps1: Rational, eps2: Rational, n: usize) -> Self {
        SchemeConfig {
            eps1,
            eps2,
            n,
            q: 256,
            seed: 0,
            trials: 1,
            rank_margin: 8,
            generation: 32,
            payload_len: 8,
        }
    }

    fn validate(&self) -> Result<()> {
        let zero = Rational::zero();
        let one = Rational::one();
        if self.eps1 < zero || self.eps1 >= one {
            return Err(Error::InvalidProbability(format!(
                "eps1 must lie in [0, 1), got {}",
                rational::format(&self.eps1)
            )));
        }
        rational::check_probability(&self.eps2)?;
        if self.n == 0 || self.trials == 0 || self.generation == 0 {
            return Err(Error::InvalidModel("n, trials and generation must be positive".into()));
        }
        Field::new(self.q)?;
        if self.q <= self.rank_margin {
            return Err(Error::Field(format!(
                "field size {} does not exceed the rank margin {}",
                self.q, self.rank_margin
            )));
        }
        Ok(())
    }

    fn channel(&self) -> Result<MultiInputPEC> {
        MultiInputPEC::xor_example(self.eps1.clone(), self.eps2.clone())
    }
}

/// Checks `eps2 >= 1 - (1 - eps1) eps1 / 2`.
pub fn check_precondition(eps1: &Rational, eps2: &Rational) -> Result<()> {
    let one = Rational::one();
    let threshold = &one - (&one - eps1) * eps1 / Rational::from_integer(2.into());
    if *eps2 < threshold {
        return Err(Error::Precondition(format!(
            "the repair phase needs eps2 >= 1 - (1 - eps1) * eps1 / 2 = {} (got eps1 = {}, eps2 = {})",
            rational::format(&threshold),
            rational::format(eps1),
            rational::format(eps2)
        )));
    }
    Ok(())
}

/// Repair-phase length per unit phase length,
/// `((1-ε1)ε1 - 2(1-ε2)) / (2 - ε1 - ε2)`.
pub fn nstar_fraction(eps1: &Rational, eps2: &Rational) -> Result<Rational> {
    check_precondition(eps1, eps2)?;
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let den = &two - eps1 - eps2;
    if den.is_zero() {
        return Ok(Rational::zero());
    }
    Ok(((&one - eps1) * eps1 - &two * (&one - eps2)) / den)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub inner: Rational,
    pub outer: Rational,
    pub gap: Rational,
}

/// Sum rates of the example channel: with coding restricted to each
/// subchannel, with the outer bound, and their difference.
pub fn closed_form_rates(eps1: &Rational, eps2: &Rational) -> ClosedForm {
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let d = &two + eps1;
    let inner = &two * (&one - eps1 * eps1) / &d + &one - eps2;
    let outer = &two * (&two - eps1 * eps1 + eps1 - eps2 - eps1 * eps2) / &d;
    let gap = eps1 * (&one - eps2) / &d;
    ClosedForm { inner, outer, gap }
}

/// The factored form `2(1+ε1)(2-ε1-ε2)/(2+ε1)` of the outer sum rate.
pub fn outer_sum_factored(eps1: &Rational, eps2: &Rational) -> Rational {
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    &two * (&one + eps1) * (&two - eps1 - eps2) / (&two + eps1)
}

/// One simulated run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeReport {
    pub n: usize,
    /// `2N` plus the realized repair-phase length.
    pub slots: usize,
    pub phase3_slots: usize,
    /// `⌈N · N*/N⌉` (or `⌈N ε1⌉` for the baseline), for comparison.
    pub phase3_planned: usize,
    /// Phase-1 slots in which `t1` received (resp. phase 2 and `t2`).
    pub direct_t1: usize,
    pub direct_t2: usize,
    pub p1: usize,
    pub p2: usize,
    pub decoded_t1: usize,
    pub decoded_t2: usize,
    /// Plain packets delivered on subchannel 2 (baseline only).
    pub subchannel2_packets: usize,
    pub non_innovative_t1: usize,
    pub non_innovative_t2: usize,
    pub success_t1: bool,
    pub success_t2: bool,
    pub success: bool,
    pub rate: f64,
    pub rate_exact: String,
}

impl SchemeReport {
    /// Packets delivered per slot.
    pub fn rate_rational(&self) -> Rational {
        let delivered = self.decoded_t1 + self.decoded_t2 + self.subchannel2_packets;
        Rational::new((delivered as u64).into(), (self.slots.max(1) as u64).into())
    }
}

/// Per-destination decoding state: the packets it lacks (known to the
/// sender) and one eliminator per generation.
struct Receiver {
    wanted: Vec<Vec<u8>>,
    gens: Vec<Eliminator>,
    non_innovative: Vec<usize>,
    /// First generation not yet at full rank.
    pointer: usize,
}

impl Receiver {
    fn new(wanted: Vec<Vec<u8>>, g: usize) -> Self {
        let count = wanted.len().div_ceil(g);
        let gens = (0..count).map(|b| Eliminator::new(g.min(wanted.len() - b * g))).collect();
        Receiver { wanted, gens, non_innovative: vec![0; count], pointer: 0 }
    }

    fn done(&self) -> bool {
        self.pointer == self.gens.len()
    }

    fn advance(&mut self) {
        while self.pointer < self.gens.len() && self.gens[self.pointer].is_complete() {
            self.pointer += 1;
        }
    }

    /// Generations for the next `count` combinations, filling rank
    /// deficits in order.
    fn targets(&self, count: usize) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(count);
        let mut b = self.pointer;
        let mut room = self.gens.get(b).map_or(0, |e| e.unknowns() - e.rank());
        while out.len() < count {
            while room == 0 && b < self.gens.len() {
                b += 1;
                room = self.gens.get(b).map_or(0, |e| e.unknowns() - e.rank());
            }
            if b >= self.gens.len() {
                out.push(None);
            } else {
                out.push(Some(b));
                room -= 1;
            }
        }
        out
    }

    fn span(&self, b: usize, g: usize) -> &[Vec<u8>] {
        &self.wanted[b * g..(b * g + self.gens[b].unknowns())]
    }

    fn decoded(&self, g: usize) -> usize {
        self.gens
            .iter()
            .enumerate()
            .filter(|(b, e)| e.solution().as_deref() == Some(self.span(*b, g)))
            .map(|(_, e)| e.unknowns())
            .sum()
    }

    fn margin_ok(&self, margin: usize) -> bool {
        self.non_innovative.iter().all(|&c| c <= margin)
    }
}

/// A coded packet: per destination, the generation and coefficients of its
/// part (if any), and the payload of the whole sum.
struct Combination {
    parts: [Option<(usize, Vec<u8>)>; 2],
    payload: Vec<u8>,
}

struct Coder {
    field: Field,
    g: usize,
    len: usize,
    rx: [Receiver; 2],
}

impl Coder {
    fn combine<R: Rng>(&self, targets: [Option<usize>; 2], rng: &mut R) -> Combination {
        let mut payload = vec![0u8; self.len];
        let parts = [0, 1].map(|u| {
            targets[u].map(|b| {
                let span = self.rx[u].span(b, self.g);
                let coeffs: Vec<u8> = (0..span.len()).map(|_| self.field.random(rng)).collect();
                for (c, p) in coeffs.iter().zip(span) {
                    self.field.axpy(&mut payload, *c, p);
                }
                (b, coeffs)
            })
        });
        Combination { parts, payload }
    }

    /// Destination `u` strips the part it already holds and files the rest.
    fn deliver(&mut self, u: usize, combo: &Combination) {
        let Some((b, coeffs)) = &combo.parts[u] else {
            return;
        };
        let mut payload = combo.payload.clone();
        if let Some((ob, oc)) = &combo.parts[1 - u] {
            let held = self.rx[1 - u].span(*ob, self.g);
            for (c, p) in oc.iter().zip(held) {
                self.field.axpy(&mut payload, *c, p);
            }
        }
        let rx = &mut self.rx[u];
        if !rx.gens[*b].insert(&self.field, coeffs.clone(), payload) {
            rx.non_innovative[*b] += 1;
        }
        rx.advance();
    }

    fn done(&self) -> bool {
        self.rx[0].done() && self.rx[1].done()
    }
}

struct Phases {
    direct: [usize; 2],
    wanted: [Vec<Vec<u8>>; 2],
    /// Subchannel-2 receptions during the first `2N` slots.
    sub2_hits: usize,
}

/// Runs the two single-destination phases on subchannel 1.
fn run_phases<R: Rng>(channel: &MultiInputPEC, field: &Field, n: usize, len: usize, rng: &mut R) -> Phases {
    let mut direct = [0, 0];
    let mut wanted: [Vec<Vec<u8>>; 2] = [Vec::new(), Vec::new()];
    let mut sub2_hits = 0;
    for owner in 0..2 {
        let other = 1 - owner;
        for _ in 0..n {
            let slot = channel.sample_slot(rng);
            let got = slot.subchannel(1);
            if slot.subchannel(2).len() == 2 {
                sub2_hits += 1;
            }
            if got.contains(owner + 1) {
                direct[owner] += 1;
            } else if got.contains(other + 1) {
                wanted[owner].push((0..len).map(|_| field.random(rng)).collect());
            }
        }
    }
    Phases { direct, wanted, sub2_hits }
}

fn ceil_times(n: usize, r: &Rational) -> usize {
    let v = Rational::from_integer((n as u64).into()) * r;
    v.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn field_for(config: &SchemeConfig) -> Result<Field> {
    config.validate()?;
    Field::new(config.q)
}

fn report(
    config: &SchemeConfig,
    coder: &Coder,
    phases: &Phases,
    phase3_slots: usize,
    phase3_planned: usize,
    subchannel2_packets: usize,
) -> SchemeReport {
    let n = config.n;
    let g = config.generation;
    let p = [coder.rx[0].wanted.len(), coder.rx[1].wanted.len()];
    let decoded = [0, 1].map(|u| phases.direct[u] + coder.rx[u].decoded(g));
    let ok = [0, 1].map(|u| decoded[u] == phases.direct[u] + p[u] && coder.rx[u].margin_ok(config.rank_margin));
    let mut r = SchemeReport {
        n,
        slots: 2 * n + phase3_slots,
        phase3_slots,
        phase3_planned,
        direct_t1: phases.direct[0],
        direct_t2: phases.direct[1],
        p1: p[0],
        p2: p[1],
        decoded_t1: decoded[0],
        decoded_t2: decoded[1],
        subchannel2_packets,
        non_innovative_t1: coder.rx[0].non_innovative.iter().sum(),
        non_innovative_t2: coder.rx[1].non_innovative.iter().sum(),
        success_t1: ok[0],
        success_t2: ok[1],
        success: ok[0] && ok[1],
        rate: 0.0,
        rate_exact: String::new(),
    };
    let exact = r.rate_rational();
    r.rate = rational::to_f64(&exact);
    r.rate_exact = rational::format(&exact);
    r
}

fn repair_cap(n: usize) -> usize {
    2 * n + 1024
}

/// The cross-subchannel scheme, trial `trial` of `config`.
pub fn run_two_phase_trial(config: &SchemeConfig, trial: usize) -> Result<SchemeReport> {
    let field = field_for(config)?;
    let planned = ceil_times(config.n, &nstar_fraction(&config.eps1, &config.eps2)?);
    let channel = config.channel()?;
    let mut rng = trial_rng(config.seed, trial);
    let phases = run_phases(&channel, &field, config.n, config.payload_len, &mut rng);
    let g = config.generation;
    let mut coder = Coder {
        field,
        g,
        len: config.payload_len,
        rx: [Receiver::new(phases.wanted[0].clone(), g), Receiver::new(phases.wanted[1].clone(), g)],
    };
    coder.rx[0].advance();
    coder.rx[1].advance();

    // Subchannel-2 combinations from the first 2N slots, formed afterwards.
    for _ in 0..phases.sub2_hits {
        if coder.done() {
            break;
        }
        let t = [coder.rx[0].targets(1)[0], coder.rx[1].targets(1)[0]];
        let combo = coder.combine(t, &mut rng);
        coder.deliver(0, &combo);
        coder.deliver(1, &combo);
    }

    let mut phase3 = 0;
    while !coder.done() && phase3 < repair_cap(config.n) {
        phase3 += 1;
        let slot = channel.sample_slot(&mut rng);
        let t0 = coder.rx[0].targets(2);
        let t1 = coder.rx[1].targets(2);
        let on_sub1 = coder.combine([t0[0], t1[0]], &mut rng);
        let on_sub2 = coder.combine([t0[1], t1[1]], &mut rng);
        for u in 0..2 {
            if slot.subchannel(1).contains(u + 1) {
                coder.deliver(u, &on_sub1);
            }
            if slot.subchannel(2).contains(u + 1) {
                coder.deliver(u, &on_sub2);
            }
        }
    }
    Ok(report(config, &coder, &phases, phase3, planned, 0))
}

/// The same phases with repair confined to subchannel 1, while subchannel
/// 2 carries fresh packets with plain retransmission.
pub fn run_baseline_trial(config: &SchemeConfig, trial: usize) -> Result<SchemeReport> {
    let field = field_for(config)?;
    let planned = ceil_times(config.n, &config.eps1);
    let channel = config.channel()?;
    let mut rng = trial_rng(config.seed, trial);
    let phases = run_phases(&channel, &field, config.n, config.payload_len, &mut rng);
    let g = config.generation;
    let mut coder = Coder {
        field,
        g,
        len: config.payload_len,
        rx: [Receiver::new(phases.wanted[0].clone(), g), Receiver::new(phases.wanted[1].clone(), g)],
    };
    coder.rx[0].advance();
    coder.rx[1].advance();

    let mut arq = phases.sub2_hits;
    let mut phase3 = 0;
    while !coder.done() && phase3 < repair_cap(config.n) {
        phase3 += 1;
        let slot = channel.sample_slot(&mut rng);
        if slot.subchannel(2).len() == 2 {
            arq += 1;
        }
        let combo = coder.combine([coder.rx[0].targets(1)[0], coder.rx[1].targets(1)[0]], &mut rng);
        for u in 0..2 {
            if slot.subchannel(1).contains(u + 1) {
                coder.deliver(u, &combo);
            }
        }
    }
    Ok(report(config, &coder, &phases, phase3, planned, arq))
}

pub fn run_two_phase(config: &SchemeConfig) -> Result<SchemeReport> {
    run_two_phase_trial(config, 0)
}

pub fn run_baseline(config: &SchemeConfig) -> Result<SchemeReport> {
    run_baseline_trial(config, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TwoPhase,
    Baseline,
}

/// Aggregate over `config.trials` independent runs.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub scheme: Scheme,
    pub trials: usize,
    pub mean_rate: f64,
    pub stderr: f64,
    pub closed_form: String,
    pub closed_form_value: f64,
    pub relative_error: f64,
    pub decode_failures: usize,
    pub reports: Vec<SchemeReport>,
}

/// Runs all trials in parallel; trial `t` always uses stream `t` of the
/// seed, so the summary does not depend on scheduling.
pub fn simulate(config: &SchemeConfig, scheme: Scheme) -> Result<SimulationSummary> {
    config.validate()?;
    let closed = closed_form_rates(&config.eps1, &config.eps2);
    let target = match scheme {
        Scheme::TwoPhase => {
            check_precondition(&config.eps1, &config.eps2)?;
            closed.outer
        }
        Scheme::Baseline => closed.inner,
    };
    let reports = (0..config.trials)
        .into_par_iter()
        .map(|t| match scheme {
            Scheme::TwoPhase => run_two_phase_trial(config, t),
            Scheme::Baseline => run_baseline_trial(config, t),
        })
        .collect::<Result<Vec<_>>>()?;
    let count = reports.len() as f64;
    let mean_exact: Rational = reports.iter().map(SchemeReport::rate_rational).sum::<Rational>()
        / Rational::from_integer((reports.len() as u64).into());
    let mean_rate = rational::to_f64(&mean_exact);
    let stderr = if reports.len() > 1 {
        let var = reports.iter().map(|r| (r.rate - mean_rate).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    let relative_error = if target.is_zero() {
        rational::to_f64(&mean_exact.abs())
    } else {
        rational::to_f64(&((&mean_exact - &target) / &target).abs())
    };
    Ok(SimulationSummary {
        scheme,
        trials: reports.len(),
        mean_rate,
        stderr,
        closed_form: rational::format(&target),
        closed_form_value: rational::to_f64(&target),
        relative_error,
        decode_failures: reports.iter().filter(|r| !r.success).count(),
        reports,
    })
}
