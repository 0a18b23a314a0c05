use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use exqip::channels::combination_fixture;
use exqip::combs::{random_deterministic_comb, CombSignature};
use exqip::gqi::{decompose_step, is_extremal, is_valid_gqi};
use exqip::linalg::Hermitian;
use exqip::random::{random_unitary, rng};
use exqip::testers::{
    qubit_tester_rank_one, rank_one_split_effects, schmidt_vector, split_outcome, Tester,
};
use exqip::{Gqi, Tolerance};
use serde::Serialize;

use crate::certificate::{assess, verify_certificate, CertificateFile};
use crate::format::{canonical_json, Kind, OperatorFile};
use crate::{Failure, Output, Result};

/// Structural and normalization check with per-level residuals.
pub fn validate(path: &Path, tol: &Tolerance) -> Result<Output> {
    let file = OperatorFile::read(path)?;
    let g = file.to_gqi(tol)?;
    let check = is_valid_gqi(&g, tol)?;
    let mut text = String::new();
    writeln!(text, "{}", if check.accepted { "valid" } else { "invalid" }).unwrap();
    writeln!(text, "kind: {}  signature: {:?}  outcomes: {}", file.kind, file.signature, g.len()).unwrap();
    for (i, (l, ok)) in check.outcome_min_eigenvalues.iter().zip(&check.outcome_psd).enumerate() {
        writeln!(text, "outcome {i}: min eigenvalue {l:.3e}{}", if *ok { "" } else { "  NOT PSD" }).unwrap();
    }
    for (n, r) in check.comb.level_residuals.iter().enumerate() {
        let flag = if *r > tol.comb { "  EXCEEDS" } else { "" };
        writeln!(text, "level {}: normalization residual {r:.3e} (tolerance {:.1e}){flag}", n + 1, tol.comb).unwrap();
    }
    Ok(Output { text, success: check.accepted })
}

pub fn extremal(path: &Path, tol: &Tolerance, certificate: Option<&Path>, verify: Option<&Path>) -> Result<Output> {
    let file = OperatorFile::read(path)?;
    if let Some(cpath) = verify {
        let cert = CertificateFile::read(cpath)?;
        let v = verify_certificate(&file, &cert)?;
        let mut text = format!("{}\n", if v.reproduced { "certificate reproduced" } else { "certificate NOT reproduced" });
        for issue in &v.issues {
            writeln!(text, "  {issue}").unwrap();
        }
        return Ok(Output { text, success: v.reproduced });
    }
    let a = assess(&file, tol)?;
    let c = &a.certificate;
    let mut text = format!("{}\n", c.verdict);
    writeln!(text, "rank {} of {} (threshold {:.3e}), outcome ranks {:?}", c.rank, c.family_size, c.threshold, c.outcome_ranks).unwrap();
    if let Some(p) = &c.perturbation {
        writeln!(text, "perturbation with epsilon* = {:.6e}", p.epsilon_star).unwrap();
    }
    if let Some(out) = certificate {
        CertificateFile::new(file.kind, &a, tol).write(out)?;
        writeln!(text, "certificate written to {}", out.display()).unwrap();
    }
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct Leaf {
    file: String,
    weight: f64,
    depth: usize,
    verdict: String,
}

#[derive(Serialize)]
struct Manifest {
    input: String,
    steps: usize,
    weight_sum: f64,
    reconstruction_residual: f64,
    leaves: Vec<Leaf>,
}

/// Decomposition tree leaves are determined by their `+`/`-` path.
fn expand(g: Gqi, path: String, weight: f64, steps: usize, tol: &Tolerance, leaves: &mut Vec<(String, Gqi, f64, bool)>) -> Result<()> {
    let extremal = is_extremal(&g, tol)?.is_extremal();
    if extremal || path.len() == steps {
        leaves.push((path, g, weight, extremal));
        return Ok(());
    }
    let d = decompose_step(&g, tol)?;
    expand(d.plus, format!("{path}p"), weight / 2.0, steps, tol, leaves)?;
    expand(d.minus, format!("{path}m"), weight / 2.0, steps, tol, leaves)
}

pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

pub fn decompose(path: &Path, steps: usize, out: &Path, tol: &Tolerance) -> Result<Output> {
    if steps == 0 {
        return Err(Failure::input("--steps must be at least 1"));
    }
    let file = OperatorFile::read(path)?;
    let a = assess(&file, tol)?;
    if a.certificate.is_extremal() {
        return Err(Failure::math(format!("{} is extremal; it has no nontrivial decomposition", path.display())));
    }
    let mut leaves = Vec::new();
    expand(a.gqi.clone(), String::new(), 1.0, steps, tol, &mut leaves)?;

    let dim = a.gqi.dim();
    let mut sums: Vec<Hermitian> = vec![Hermitian::zeros(dim); a.gqi.len()];
    for (_, g, w, _) in &leaves {
        for (s, t) in sums.iter_mut().zip(g.outcomes()) {
            *s = s.add_scaled(*w, t);
        }
    }
    let residual = sums.iter().zip(a.gqi.outcomes()).map(|(s, t)| s.max_abs_diff(t)).fold(0.0, f64::max);
    let weight_sum: f64 = leaves.iter().map(|l| l.2).sum();

    std::fs::create_dir_all(out).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
    let mut manifest = Manifest {
        input: path.display().to_string(),
        steps,
        weight_sum,
        reconstruction_residual: residual,
        leaves: Vec::new(),
    };
    for (p, g, w, ext) in &leaves {
        let name = format!("leaf-{}.json", if p.is_empty() { "root" } else { p });
        OperatorFile::from_gqi(file.kind, g).with_label("weight", *w).with_label("path", p.as_str()).write(&out.join(&name))?;
        manifest.leaves.push(Leaf { file: name, weight: *w, depth: p.len(), verdict: if *ext { "extremal" } else { "not extremal" }.into() });
    }
    let json = canonical_json(&manifest);
    let mpath = out.join("decomposition.json");
    std::fs::write(&mpath, json).map_err(|e| Failure::input(format!("{}: {e}", mpath.display())))?;

    let n_ext = leaves.iter().filter(|l| l.3).count();
    let text = format!(
        "{} leaves ({n_ext} extremal), weights sum to {weight_sum}, reconstruction residual {residual:.3e}\nmanifest written to {}\n",
        leaves.len(),
        mpath.display()
    );
    if residual > RECONSTRUCTION_TOLERANCE || (weight_sum - 1.0).abs() > 1e-12 {
        return Ok(Output::failed(text));
    }
    Ok(Output::ok(text))
}

/// Parameters of `generate`.
#[derive(Clone, Debug)]
pub enum Generate {
    TwoOutcomeQubitTester { schmidt_angle: f64 },
    SplitTester { base: PathBuf, outcome: Option<usize>, sub_povm: Option<PathBuf> },
    Combination { k: usize },
    RandomComb { signature: Vec<usize>, spread: f64 },
}

pub fn generate(what: &Generate, seed: Option<u64>, tol: &Tolerance) -> Result<OperatorFile> {
    let file = match what {
        Generate::TwoOutcomeQubitTester { schmidt_angle } => {
            let mut phi = schmidt_vector(*schmidt_angle);
            if let Some(s) = seed {
                let mut r = rng(s);
                let u = random_unitary(2, &mut r).kron(&random_unitary(2, &mut r));
                phi = u.apply(&phi);
            }
            let t = qubit_tester_rank_one(&phi)?;
            OperatorFile::from_gqi(Kind::Tester, &t.to_gqi()).with_label("schmidt-angle", *schmidt_angle)
        }
        Generate::SplitTester { base, outcome, sub_povm } => {
            let bf = OperatorFile::read(base)?;
            if bf.kind != Kind::Tester {
                return Err(Failure::input("split-tester needs a tester file as --base"));
            }
            let t = Tester::from_gqi(bf.to_gqi(tol)?)?;
            let index = outcome.unwrap_or(t.len() - 1);
            if index >= t.len() {
                return Err(Failure::input(format!("outcome {index} out of range for {} outcomes", t.len())));
            }
            let effects = match sub_povm {
                Some(p) => OperatorFile::read(p)?.to_gqi(tol)?.into_outcomes(),
                None => rank_one_split_effects(&t, index, tol)?,
            };
            let split = split_outcome(&t, index, &effects, tol)?;
            OperatorFile::from_gqi(Kind::Tester, &split.to_gqi()).with_label("split-outcome", index)
        }
        Generate::Combination { k } => {
            let ins = combination_fixture(*k)?;
            OperatorFile::from_gqi(Kind::Instrument, &ins.to_gqi()).with_label("combination", *k)
        }
        Generate::RandomComb { signature, spread } => {
            let sig = CombSignature::new(signature.clone())?;
            let c = random_deterministic_comb(&sig, seed.unwrap_or(0), *spread)?;
            OperatorFile::from_gqi(Kind::Comb, &Gqi::new(sig, vec![c.into_operator()])?).with_label("spread", *spread)
        }
    };
    let file = match seed {
        Some(s) => file.with_label("seed", s),
        None => file,
    };
    // generated objects must validate under the same tolerance
    let check = is_valid_gqi(&file.to_gqi(tol)?, tol)?;
    if !check.accepted {
        return Err(Failure::math("generated object failed validation"));
    }
    Ok(file)
}
