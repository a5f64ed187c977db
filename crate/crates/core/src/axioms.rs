//! Randomized verification of the λ-bracket calculus axioms on a bracket
//! table: skew-symmetry, the Jacobi identity, the non-commutative Wick
//! formula, quasi-commutativity and conformal-weight additivity.

use crate::error::Result;
use crate::scalar::{qi, KPoly};
use crate::vertex::{
    jacobi_defect, quasi_commutativity_defect, skew_defect, wick_defect, BracketTable, Factor,
    VState,
};
use std::collections::BTreeMap;
use std::fmt;

/// Small deterministic xorshift generator; the suite must be reproducible
/// from the seed alone.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(2685821657736338717).max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(2685821657736338717)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Outcome of the axiom suite: number of checks per axiom and the failures.
pub struct AxiomReport {
    pub cases: usize,
    pub checks: BTreeMap<&'static str, usize>,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axiom suite: {} randomized cases", self.cases)?;
        for (name, count) in &self.checks {
            writeln!(f, "  {}: {} checks", name, count)?;
        }
        for failure in &self.failures {
            writeln!(f, "  FAILURE: {}", failure)?;
        }
        write!(f, "  result: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Generates a random parity-homogeneous monomial state of conformal weight
/// at most `weight_bound`.
fn random_state(table: &BracketTable, rng: &mut Rng, weight_bound: i64) -> VState {
    let ngen = table.gens().len() as u32;
    loop {
        let len = 1 + rng.below(2);
        let mut factors = Vec::with_capacity(len);
        let mut weight = 0i64;
        for _ in 0..len {
            let gen = rng.below(ngen as usize) as u32;
            let t = rng.below(2) as u32;
            weight += table.factor_weight(Factor::new(gen, t));
            factors.push(Factor::new(gen, t));
        }
        if weight > weight_bound {
            continue;
        }
        let coeff = qi(1 + rng.below(3) as i64);
        let state = table.canon_word(&factors).scale(&KPoly::constant(coeff));
        if state.is_zero() {
            continue;
        }
        return state;
    }
}

/// Runs `cases` randomized instances of every axiom at the given weight
/// bound. All checks are exact; any defect is reported verbatim.
pub fn run_axiom_suite(
    table: &BracketTable,
    weight_bound: i64,
    cases: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let mut rng = Rng::new(seed);
    let mut checks: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    let record = |name: &'static str, ok: bool, detail: String, failures: &mut Vec<String>| {
        if !ok {
            failures.push(format!("{}: {}", name, detail));
        }
    };
    for case in 0..cases {
        let a = random_state(table, &mut rng, weight_bound);
        let b = random_state(table, &mut rng, weight_bound);
        let c = random_state(table, &mut rng, weight_bound);

        let skew = skew_defect(table, &a, &b)?;
        *checks.entry("skew-symmetry").or_insert(0) += 1;
        record(
            "skew-symmetry",
            skew.is_zero(),
            format!("case {}: defect {:?}", case, skew),
            &mut failures,
        );

        let qc = quasi_commutativity_defect(table, &a, &b)?;
        *checks.entry("quasi-commutativity").or_insert(0) += 1;
        record(
            "quasi-commutativity",
            qc.is_zero(),
            format!("case {}: defect {}", case, table.display(&qc)),
            &mut failures,
        );

        let wick = wick_defect(table, &a, &b, &c)?;
        *checks.entry("wick-formula").or_insert(0) += 1;
        record(
            "wick-formula",
            wick.is_zero(),
            format!("case {}: defect {:?}", case, wick),
            &mut failures,
        );

        let jac = jacobi_defect(table, &a, &b, &c)?;
        *checks.entry("jacobi").or_insert(0) += 1;
        record(
            "jacobi",
            jac.is_zero(),
            format!("case {}", case),
            &mut failures,
        );

        // Δ(a_(n) b) = Δ(a) + Δ(b) − n − 1 on homogeneous inputs
        if let (Some(wa), Some(wb)) = (table.conformal_weight(&a), table.conformal_weight(&b)) {
            let br = table.lambda_bracket(&a, &b)?;
            let mut ok = true;
            for (&j, v) in br.coeffs() {
                if table.conformal_weight(v) != Some(wa + wb - j as i64 - 1) {
                    ok = false;
                }
            }
            let prod = table.normal_product(&a, &b)?;
            if !prod.is_zero() && table.conformal_weight(&prod) != Some(wa + wb) {
                ok = false;
            }
            *checks.entry("weight-additivity").or_insert(0) += 1;
            record(
                "weight-additivity",
                ok,
                format!("case {}", case),
                &mut failures,
            );
        }

        // ∂ is a derivation compatible with canonicalization
        let dprod = table.derivative(&table.normal_product(&a, &b)?);
        let leibniz = table
            .normal_product(&table.derivative(&a), &b)?
            .add(&table.normal_product(&a, &table.derivative(&b))?)?;
        *checks.entry("derivative-leibniz").or_insert(0) += 1;
        record(
            "derivative-leibniz",
            dprod == leibniz,
            format!("case {}", case),
            &mut failures,
        );
    }
    Ok(AxiomReport {
        cases,
        checks,
        failures,
    })
}
