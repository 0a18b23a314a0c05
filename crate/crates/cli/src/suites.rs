//! Seeded property suites with a machine-readable summary.

use exqip::channels::{
    channel_extremal_theorem1, choi_condition, classify_combination, combination_fixture, CombinationTriple,
};
use exqip::fixtures::{
    extremal_qubit_tester, non_extremal_qubit_tester, qubit_family_for, qubit_tester, random_channel,
    random_full_rank_state, random_rescaled_povm_tester,
};
use exqip::random::{random_unitary, rng};
use exqip::testers::{check_bounds, is_extremal_tester, xi_inverse, xi_transform};
use exqip::Tolerance;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Failure, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Equivalence,
    XiInvariance,
    Bounds,
    #[value(name = "appendix-c")]
    CombinationTable,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Equivalence => "equivalence",
            Suite::XiInvariance => "xi-invariance",
            Suite::Bounds => "bounds",
            Suite::CombinationTable => "appendix-c",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub suite: String,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    /// Cases where the property applied (extremal testers for `bounds`).
    pub applicable: usize,
    /// Seeds or rows of the first few failures.
    pub failing: Vec<String>,
}

struct Case {
    ok: bool,
    applicable: bool,
    label: String,
}

pub const XI_ROUND_TRIP: f64 = 1e-10;

fn equivalence_case(seed: u64, tol: &Tolerance) -> exqip::Result<Case> {
    const PAIRS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let (d0, d1) = PAIRS[(seed % 4) as usize];
    let mut r = rng(seed);
    let count = r.random_range(d0.div_ceil(d1)..=d0 * d1);
    let c = random_channel(d0, d1, count, &mut r)?;
    let ok = choi_condition(&c, tol)?.extremal == channel_extremal_theorem1(&c, tol)?.extremal;
    Ok(Case { ok, applicable: true, label: format!("seed {seed}") })
}

fn xi_case(seed: u64, tol: &Tolerance) -> exqip::Result<Case> {
    let mut r = rng(seed);
    let t = if seed.is_multiple_of(2) { extremal_qubit_tester(&mut r)? } else { non_extremal_qubit_tester(&mut r)? };
    let rho = random_full_rank_state(2, &mut r);
    let u = random_unitary(2, &mut r);
    let tp = xi_transform(&t, &rho, &u, tol)?;
    let same = is_extremal_tester(&t, tol)?.is_extremal() == is_extremal_tester(&tp, tol)?.is_extremal();
    let back = xi_inverse(&tp, &rho, &u, tol)?;
    let err = t.outcomes().iter().zip(back.outcomes()).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    Ok(Case { ok: same && err <= XI_ROUND_TRIP, applicable: true, label: format!("seed {seed}") })
}

fn bounds_case(seed: u64, tol: &Tolerance) -> exqip::Result<Case> {
    let mut r = rng(seed);
    let t = if seed.is_multiple_of(2) {
        qubit_tester(qubit_family_for(seed as usize / 2, &mut r), &mut r)?
    } else {
        let m = r.random_range(2..=16);
        random_rescaled_povm_tester(m, 4usize.div_ceil(m), &mut r)?
    };
    let extremal = is_extremal_tester(&t, tol)?.is_extremal();
    let ok = !extremal || check_bounds(&t, tol).holds();
    Ok(Case { ok, applicable: extremal, label: format!("seed {seed}") })
}

fn combination_row_case(k: usize, tol: &Tolerance) -> exqip::Result<Case> {
    let got = classify_combination(&combination_fixture(k)?, tol)?;
    let ok = Some(got) == CombinationTriple::from_row(k);
    Ok(Case { ok, applicable: true, label: format!("row {k} {got}") })
}

pub fn run(suite: Suite, seeds: usize, jobs: usize, tol: &Tolerance) -> Result<Summary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::input(format!("thread pool: {e}")))?;
    let cases: Vec<exqip::Result<Case>> = pool.install(|| match suite {
        Suite::CombinationTable => [1, 2, 3, 4, 6, 7, 8].into_par_iter().map(|k| combination_row_case(k, tol)).collect(),
        _ => (0..seeds as u64)
            .into_par_iter()
            .map(|s| match suite {
                Suite::Equivalence => equivalence_case(s, tol),
                Suite::XiInvariance => xi_case(s, tol),
                _ => bounds_case(s, tol),
            })
            .collect(),
    });
    let mut failures = 0;
    let mut applicable = 0;
    let mut failing = Vec::new();
    for c in &cases {
        let (ok, label) = match c {
            Ok(c) => {
                applicable += c.applicable as usize;
                (c.ok, c.label.clone())
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
            if failing.len() < 5 {
                failing.push(label);
            }
        }
    }
    Ok(Summary { suite: suite.name().into(), cases: cases.len(), failures, passed: failures == 0, applicable, failing })
}
