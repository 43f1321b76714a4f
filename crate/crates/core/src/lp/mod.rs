//! Linear constraint systems over named rate variables.
//!
//! Variable names follow a fixed convention so systems can be dumped and
//! inspected: `R[k]` for the total rate to destination `k` and `R[i][k]` for
//! the share of that rate carried by subchannel `i`.
//!
//! [`ConstraintSystem::maximize`] runs an exact rational two-phase simplex
//! (Bland's rule) by default, or an `f64` variant with tolerance
//! [`FLOAT_TOLERANCE`]. Every optimal solve also returns a dual certificate,
//! which is checked against the original rows before the solution is handed
//! back.

mod scalar;
mod simplex;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use scalar::{Scalar, FLOAT_TOLERANCE};
use simplex::Outcome;

pub fn total_rate(k: usize) -> String {
    format!("R[{k}]")
}

pub fn split_rate(i: usize, k: usize) -> String {
    format!("R[{i}][{k}]")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "float")]
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

/// One linear row `Σ coeff·var (rel) rhs`. Coefficients are sparse and sorted
/// by variable index; zero coefficients are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        for (v, c) in coeffs {
            *merged.entry(v).or_insert_with(Rational::zero) += c;
        }
        Row {
            coeffs: merged.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(v, c)| c * &point[*v]).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSystem {
    variables: Vec<String>,
    nonneg: Vec<bool>,
    rows: Vec<Row>,
    index: HashMap<String, usize>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable; names must be unique.
    pub fn add_variable(&mut self, name: impl Into<String>, nonneg: bool) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::MalformedSystem(format!("duplicate variable {name}")));
        }
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(name);
        self.nonneg.push(nonneg);
        Ok(id)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn is_nonneg(&self, v: usize) -> bool {
        self.nonneg[v]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn add_row(&mut self, row: Row) -> Result<()> {
        if let Some((v, _)) = row.coeffs.iter().find(|(v, _)| *v >= self.variables.len()) {
            return Err(Error::MalformedSystem(format!("row references undeclared variable #{v}")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn add_named_row(&mut self, coeffs: &[(&str, Rational)], relation: Relation, rhs: Rational) -> Result<()> {
        let mut resolved = Vec::with_capacity(coeffs.len());
        for (name, c) in coeffs {
            let v = self
                .var(name)
                .ok_or_else(|| Error::MalformedSystem(format!("row references undeclared variable {name}")))?;
            resolved.push((v, c.clone()));
        }
        self.add_row(Row::new(resolved, relation, rhs))
    }

    /// Appends `other`'s variables (renamed by `rename`) and rows. Variables
    /// whose renamed form already exists are shared instead of duplicated.
    pub fn absorb(&mut self, other: &ConstraintSystem, rename: impl Fn(&str) -> String) -> Result<()> {
        let mut map = Vec::with_capacity(other.variables.len());
        for (v, name) in other.variables.iter().enumerate() {
            let renamed = rename(name);
            let id = match self.var(&renamed) {
                Some(id) => id,
                None => self.add_variable(renamed, other.nonneg[v])?,
            };
            map.push(id);
        }
        for row in &other.rows {
            self.add_row(Row::new(
                row.coeffs.iter().map(|(v, c)| (map[*v], c.clone())),
                row.relation,
                row.rhs.clone(),
            ))?;
        }
        Ok(())
    }

    /// Resolves a name→weight map to a dense objective.
    pub fn objective(&self, weights: &BTreeMap<String, Rational>) -> Result<Vec<Rational>> {
        let mut dense = vec![Rational::zero(); self.variables.len()];
        for (name, w) in weights {
            let v = self
                .var(name)
                .ok_or_else(|| Error::VariableMismatch(format!("objective names unknown variable {name}")))?;
            dense[v] = w.clone();
        }
        Ok(dense)
    }

    /// Maximizes `objective·x` (dense, one weight per variable).
    pub fn maximize(&self, objective: &[Rational], mode: Mode) -> Result<LpSolution> {
        if objective.len() != self.variables.len() {
            return Err(Error::MalformedSystem(format!(
                "objective has {} weights for {} variables",
                objective.len(),
                self.variables.len()
            )));
        }
        let solution = match mode {
            Mode::Exact => {
                let outcome = simplex::solve::<Rational>(self, objective);
                self.finish(outcome, objective, mode)
            }
            Mode::Float => {
                let obj: Vec<f64> = objective.iter().map(f64::from_rational).collect();
                let outcome = simplex::solve::<f64>(self, &obj);
                self.finish(outcome, objective, mode)
            }
        };
        if let Some(cert) = &solution.dual {
            if !self.certificate_holds(objective, &solution.assignment, cert, mode) {
                return Err(Error::MalformedSystem(
                    "solver produced a dual certificate that does not verify".into(),
                ));
            }
        }
        Ok(solution)
    }

    pub fn maximize_named(&self, weights: &BTreeMap<String, Rational>, mode: Mode) -> Result<LpSolution> {
        self.maximize(&self.objective(weights)?, mode)
    }

    /// True when some assignment satisfies every row.
    pub fn is_feasible(&self, mode: Mode) -> Result<bool> {
        let zero = vec![Rational::zero(); self.variables.len()];
        Ok(self.maximize(&zero, mode)?.status == LpStatus::Optimal)
    }

    fn finish<S: Scalar>(&self, outcome: Outcome<S>, objective: &[Rational], mode: Mode) -> LpSolution {
        match outcome {
            Outcome::Optimal { primal, dual } => {
                let assignment: Vec<Rational> = primal.iter().map(S::to_rational).collect();
                let value = objective.iter().zip(&assignment).map(|(c, x)| c * x).sum();
                LpSolution {
                    status: LpStatus::Optimal,
                    objective: Some(value),
                    assignment,
                    dual: Some(dual.iter().map(S::to_rational).collect()),
                    variables: self.variables.clone(),
                    mode,
                }
            }
            Outcome::Infeasible => LpSolution::empty(LpStatus::Infeasible, self, mode),
            Outcome::Unbounded => LpSolution::empty(LpStatus::Unbounded, self, mode),
        }
    }

    /// Checks dual feasibility of `dual` and strong duality against `primal`.
    ///
    /// `yᵀA ≥ c` on nonnegative columns, `= c` on free ones, `y ≥ 0` on `≤`
    /// rows, `y ≤ 0` on `≥` rows, and `bᵀy = cᵀx`.
    pub fn certificate_holds(&self, objective: &[Rational], primal: &[Rational], dual: &[Rational], mode: Mode) -> bool {
        let tol = match mode {
            Mode::Exact => Rational::zero(),
            Mode::Float => rational::from_f64(1e-6).unwrap(),
        };
        let scale = |x: &Rational| &tol * (Rational::from_integer(1.into()) + x.abs());
        for (row, y) in self.rows.iter().zip(dual) {
            let ok = match row.relation {
                Relation::Le => *y >= -&tol,
                Relation::Ge => *y <= tol,
                Relation::Eq => true,
            };
            if !ok {
                return false;
            }
        }
        let mut reduced: Vec<Rational> = objective.iter().map(|c| -c).collect();
        for (row, y) in self.rows.iter().zip(dual) {
            for (v, a) in &row.coeffs {
                reduced[*v] += a * y;
            }
        }
        for (v, r) in reduced.iter().enumerate() {
            let slack = scale(&objective[v]);
            let ok = if self.nonneg[v] { *r >= -&slack } else { r.abs() <= slack };
            if !ok {
                return false;
            }
        }
        let dual_value: Rational = self.rows.iter().zip(dual).map(|(row, y)| &row.rhs * y).sum();
        let primal_value: Rational = objective.iter().zip(primal).map(|(c, x)| c * x).sum();
        (dual_value - &primal_value).abs() <= scale(&primal_value)
    }

    /// Exact substitution check of every row and sign constraint.
    pub fn feasible(&self, point: &BTreeMap<String, Rational>) -> Result<bool> {
        let dense = self.dense_point(point)?;
        Ok(self.feasible_dense(&dense))
    }

    pub fn feasible_dense(&self, point: &[Rational]) -> bool {
        point.len() == self.variables.len()
            && point
                .iter()
                .zip(&self.nonneg)
                .all(|(x, &nn)| !nn || !x.is_negative())
            && self.rows.iter().all(|r| r.relation.holds(&r.lhs(point), &r.rhs))
    }

    fn dense_point(&self, point: &BTreeMap<String, Rational>) -> Result<Vec<Rational>> {
        if let Some(extra) = point.keys().find(|k| !self.index.contains_key(*k)) {
            return Err(Error::VariableMismatch(format!("point assigns unknown variable {extra}")));
        }
        self.variables
            .iter()
            .map(|name| {
                point
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::VariableMismatch(format!("point does not assign {name}")))
            })
            .collect()
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            variables: self
                .variables
                .iter()
                .zip(&self.nonneg)
                .map(|(name, &nonneg)| VariableSpec { name: name.clone(), nonneg })
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| RowSpec {
                    coeffs: r
                        .coeffs
                        .iter()
                        .map(|(v, c)| (self.variables[*v].clone(), rational::format(c)))
                        .collect(),
                    rel: r.relation,
                    rhs: rational::format(&r.rhs),
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let mut sys = ConstraintSystem::new();
        for v in &spec.variables {
            sys.add_variable(v.name.clone(), v.nonneg)?;
        }
        for r in &spec.rows {
            let coeffs: Vec<(&str, Rational)> = r
                .coeffs
                .iter()
                .map(|(n, c)| Ok((n.as_str(), rational::parse(c)?)))
                .collect::<Result<_>>()?;
            sys.add_named_row(&coeffs, r.rel, rational::parse(&r.rhs)?)?;
        }
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("system serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_spec(&spec)
    }
}

/// JSON form of a [`ConstraintSystem`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub variables: Vec<VariableSpec>,
    pub rows: Vec<RowSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub nonneg: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowSpec {
    /// `[variable, coefficient]` pairs in row order.
    pub coeffs: Vec<(String, String)>,
    pub rel: Relation,
    pub rhs: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at the optimum (`None` unless optimal).
    pub objective: Option<Rational>,
    /// One value per variable (empty unless optimal).
    pub assignment: Vec<Rational>,
    /// One multiplier per row (`None` unless optimal).
    pub dual: Option<Vec<Rational>>,
    pub variables: Vec<String>,
    pub mode: Mode,
}

impl LpSolution {
    fn empty(status: LpStatus, sys: &ConstraintSystem, mode: Mode) -> Self {
        LpSolution {
            status,
            objective: None,
            assignment: Vec::new(),
            dual: None,
            variables: sys.variables.clone(),
            mode,
        }
    }

    pub fn value_of(&self, name: &str) -> Option<&Rational> {
        let v = self.variables.iter().position(|n| n == name)?;
        self.assignment.get(v)
    }

    pub fn assignment_map(&self) -> BTreeMap<String, Rational> {
        self.variables
            .iter()
            .cloned()
            .zip(self.assignment.iter().cloned())
            .collect()
    }
}
