//! Problem files, reports and the subcommands of the `realstab` binary.
//!
//! A problem file is a JSON object
//!
//! ```json
//! {"f1": [2, -3, 1], "f2": [0, -5, 1], "half_plane": true, "den": [1, 2, 1]}
//! ```
//!
//! with ascending real coefficients. With `half_plane` the arrays are
//! numerators of `f_j(s) / den(s)` on the right half-plane; `den` defaults to
//! `(1 + s)^d`, `d` the larger degree, and both are pulled back to the disc.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use realstab_core::corpus::{self, Pair};
use realstab_core::{
    cayley_pullback, corona_delta, parity_interlacing, poz_check, synthesize, DiscGrid, Field, RealPolynomial,
    SynthConfig, SynthesisResult, VerifyReport,
};
use realstab_core::certify::ZERO_TOL;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input or configuration; exit code 1.
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A pipeline stage failed; exit code 4.
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Stage { .. } => 4,
        }
    }
}

impl From<realstab_core::Error> for CliError {
    fn from(e: realstab_core::Error) -> Self {
        match e.stage() {
            Some(stage) => CliError::Stage {
                stage: stage.to_string(),
                message: e.root().to_string(),
            },
            None => CliError::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    #[serde(default)]
    pub half_plane: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<f64>>,
}

impl Problem {
    pub fn parse(text: &str) -> Result<Problem, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("problem file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Problem, CliError> {
        Problem::parse(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    /// The pair on the disc.
    pub fn polys(&self) -> Result<(RealPolynomial, RealPolynomial), CliError> {
        let poly = |name: &str, c: &[f64]| {
            if c.is_empty() {
                return Err(CliError::Config(format!("{name} has no coefficients")));
            }
            RealPolynomial::try_new(c.to_vec()).map_err(|e| CliError::Config(format!("{name}: {e}")))
        };
        let f1 = poly("f1", &self.f1)?;
        let f2 = poly("f2", &self.f2)?;
        if !self.half_plane {
            if self.den.is_some() {
                return Err(CliError::Config("den is only meaningful with half_plane".into()));
            }
            return Ok((f1, f2));
        }
        let d = f1.degree().max(f2.degree()).max(0) as usize;
        let den = match &self.den {
            Some(c) => poly("den", c)?,
            None => (0..d).fold(RealPolynomial::constant(1.0), |acc, _| &acc * &RealPolynomial::new(vec![1.0, 1.0])),
        };
        // Both numerators must be multiplied by the same power of (1 + z).
        if den.degree() < d as isize {
            return Err(CliError::Config(format!(
                "den has degree {} but the numerators reach degree {d}; f_j / den must be proper",
                den.degree()
            )));
        }
        let (n1, _) = cayley_pullback(&f1, &den).map_err(|e| CliError::Config(e.to_string()))?;
        let (n2, _) = cayley_pullback(&f2, &den).map_err(|e| CliError::Config(e.to_string()))?;
        Ok((n1, n2))
    }
}

/// Grid sizes the library accepts; checked up front so that a bad `--n` is a
/// configuration error rather than a stage failure.
pub fn check_resolution(n: usize) -> Result<(), CliError> {
    DiscGrid::new(n).map(|_| ()).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub unimodular: bool,
    pub grid_n: usize,
    pub delta_lower: f64,
    pub grid_min: f64,
    pub lipschitz_bound: f64,
    /// `None` when the pair is not unimodular.
    pub poz: Option<bool>,
    pub parity_interlacing: Option<bool>,
    pub f2_real_zeros: Vec<f64>,
    pub f1_values: Vec<f64>,
    pub exit_code: i32,
}

/// Exit `0` if unimodular and POZ, `2` if unimodular but not POZ, `3` if not
/// unimodular.
pub fn cmd_check(problem: &Problem, n: usize) -> Result<CheckReport, CliError> {
    check_resolution(n)?;
    let (f1, f2) = problem.polys()?;
    let grid = Arc::new(DiscGrid::new(n)?);
    let s1 = f1.sup_norm_disc(4096).sampled.max(1.0);
    let s2 = f2.sup_norm_disc(4096).sampled.max(1.0);
    let (cert, unimodular) = match corona_delta(&f1.scale(1.0 / s1), &f2.scale(1.0 / s2), &grid) {
        Ok(c) => (Some(c), true),
        Err(realstab_core::Error::NotUnimodular { .. }) => (None, false),
        Err(e) => return Err(e.into()),
    };
    let mut report = CheckReport {
        unimodular,
        grid_n: n,
        delta_lower: cert.as_ref().map_or(0.0, |c| c.delta_lower),
        grid_min: cert.as_ref().map_or(0.0, |c| c.grid_min),
        lipschitz_bound: cert.as_ref().map_or(0.0, |c| c.lipschitz_bound),
        poz: None,
        parity_interlacing: None,
        f2_real_zeros: Vec::new(),
        f1_values: Vec::new(),
        exit_code: 3,
    };
    if !unimodular {
        return Ok(report);
    }
    match poz_check(&f1, &f2, ZERO_TOL) {
        Ok(poz) => {
            report.poz = Some(poz.is_poz());
            report.f2_real_zeros = poz.zeros.iter().map(|r| r.value).collect();
            report.f1_values = poz.f1_values.clone();
            report.parity_interlacing = Some(parity_interlacing(&f1, &f2, ZERO_TOL)?);
            report.exit_code = if poz.is_poz() { 0 } else { 2 };
        }
        // A common real zero that the grid certificate did not catch.
        Err(realstab_core::Error::ZeroOnZero { .. }) => {
            report.unimodular = false;
            report.exit_code = 3;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub n: usize,
    pub out: PathBuf,
    pub delta_floor: Option<f64>,
    pub eps: Option<f64>,
    pub dump_regions: bool,
}

impl SynthOptions {
    pub fn config(&self) -> SynthConfig {
        let mut cfg = SynthConfig {
            n: self.n,
            delta_floor: self.delta_floor,
            ..SynthConfig::default()
        };
        if let Some(eps) = self.eps {
            cfg.eps = eps;
        }
        cfg
    }
}

/// `fields.json`: what a reader of the CSV files needs to interpret them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldsHeader {
    pub n: usize,
    pub h: f64,
    pub files: Vec<String>,
    pub defects: std::collections::BTreeMap<String, f64>,
}

/// Runs the pipeline and writes `report.json`, `fields.json` and one CSV
/// per field into `opts.out`. The report is returned whether or not it
/// passes.
pub fn cmd_synth(problem: &Problem, opts: &SynthOptions) -> Result<VerifyReport, CliError> {
    check_resolution(opts.n)?;
    if let Some(eps) = opts.eps {
        if !(eps > 0.0) {
            return Err(CliError::Config(format!("--eps must be positive, got {eps}")));
        }
    }
    if let Some(floor) = opts.delta_floor {
        if !(floor > 0.0) {
            return Err(CliError::Config(format!("--delta-floor must be positive, got {floor}")));
        }
    }
    let (f1, f2) = problem.polys()?;
    let r = synthesize(&f1, &f2, &opts.config())?;
    write_outputs(&r, opts)?;
    Ok(r.report)
}

fn write_outputs(r: &SynthesisResult, opts: &SynthOptions) -> Result<(), CliError> {
    let out = &opts.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut fields: Vec<(&str, Field)> = vec![
        ("g1", r.g1.clone()),
        ("g2", r.g2.clone()),
        ("u", r.u.clone()),
        ("k", r.k.clone()),
        ("phi", r.phi.clone()),
        ("log_f1", r.log_f1.clone()),
    ];
    if opts.dump_regions {
        fields.extend([
            ("e1", r.e1.to_field()),
            ("e2", r.e2.to_field()),
            ("s", r.s.to_field()),
            ("q", r.q.clone()),
        ]);
    }
    let mut files = Vec::new();
    for (name, field) in &fields {
        let file = format!("{name}.csv");
        write_csv(&out.join(&file), field)?;
        files.push(file);
    }
    let header = FieldsHeader {
        n: r.grid.n(),
        h: r.grid.h(),
        files,
        defects: r.report.symmetry_defects.clone(),
    };
    write_json(&out.join("fields.json"), &header)?;
    write_json(&out.join("report.json"), &r.report)
}

fn write_csv(path: &Path, field: &Field) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    field.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub residual_sup: Option<f64>,
    pub g1_dbar_sup: Option<f64>,
    pub g1_dbar_sup_core: Option<f64>,
    pub g1_sup: Option<f64>,
    pub delta_prime: Option<f64>,
    pub pass: Option<bool>,
    /// Failing stage, if any.
    pub error: Option<String>,
}

/// One pipeline run per grid size. A failing run becomes a row with its
/// stage name instead of aborting the study.
pub fn cmd_convergence(problem: &Problem, ns: &[usize], base: &SynthConfig) -> Result<Vec<ConvergenceRow>, CliError> {
    if ns.len() < 2 {
        return Err(CliError::Config(format!(
            "a convergence study needs at least two grid sizes, got {}",
            ns.len()
        )));
    }
    for &n in ns {
        check_resolution(n)?;
    }
    let (f1, f2) = problem.polys()?;
    let rows = ns
        .iter()
        .map(|&n| {
            let h = 2.0 / (n - 1) as f64;
            match synthesize(&f1, &f2, &SynthConfig { n, ..base.clone() }) {
                Ok(r) => ConvergenceRow {
                    n,
                    h,
                    residual_sup: Some(r.report.residual_sup),
                    g1_dbar_sup: Some(r.report.g1_dbar_sup),
                    g1_dbar_sup_core: Some(r.report.g1_dbar_sup_core),
                    g1_sup: Some(r.report.g1_sup),
                    delta_prime: Some(r.report.delta_prime),
                    pass: Some(r.report.pass),
                    error: None,
                },
                Err(e) => ConvergenceRow {
                    n,
                    h,
                    residual_sup: None,
                    g1_dbar_sup: None,
                    g1_dbar_sup_core: None,
                    g1_sup: None,
                    delta_prime: None,
                    pass: None,
                    error: Some(e.stage().unwrap_or("unknown").to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

pub const CONVERGENCE_HEADER: &str = "n,h,residual_sup,g1_dbar_sup,g1_dbar_sup_core,g1_sup,delta_prime,pass,error";

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:e},{},{},{},{},{},{},{}\n",
            r.n,
            r.h,
            num(r.residual_sup),
            num(r.g1_dbar_sup),
            num(r.g1_dbar_sup_core),
            num(r.g1_sup),
            num(r.delta_prime),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
            r.error.as_deref().unwrap_or(""),
        ));
    }
    out
}

/// Seeded corona-valid pairs, as problem objects.
pub fn cmd_gen_corpus(seed: u64, count: usize, max_degree: usize) -> Vec<Problem> {
    corpus::generate(seed, count, max_degree, corpus::corona_valid)
        .into_iter()
        .map(|Pair { f1, f2 }| Problem {
            f1,
            f2,
            half_plane: false,
            den: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_parsing() {
        let p = Problem::parse(r#"{"f1":[1],"f2":[0]}"#).unwrap();
        assert!(!p.half_plane);
        assert!(Problem::parse(r#"{"f1":[1]}"#).is_err());
        assert!(Problem::parse(r#"{"f1":[1],"f2":[0],"extra":1}"#).is_err());
        let bad = Problem::parse(r#"{"f1":[],"f2":[1]}"#).unwrap();
        assert!(matches!(bad.polys(), Err(CliError::Config(_))));
    }

    #[test]
    fn half_plane_default_denominator() {
        // s - 1 over 1 + s is -z under s = (1 - z)/(1 + z).
        let p = Problem { f1: vec![-1.0, 1.0], f2: vec![1.0], half_plane: true, den: None };
        let (n1, n2) = p.polys().unwrap();
        assert_eq!(n1.coeffs(), &[0.0, -2.0]);
        assert_eq!(n2.coeffs(), &[1.0, 1.0]);
        let q = Problem { den: Some(vec![1.0, 1.0]), ..p.clone() };
        assert_eq!(q.polys().unwrap(), (n1, n2));
        let improper = Problem { den: Some(vec![1.0]), ..p };
        assert!(matches!(improper.polys(), Err(CliError::Config(_))));
    }

    #[test]
    fn check_examples() {
        let run = |t: &str| cmd_check(&Problem::parse(t).unwrap(), 65).unwrap().exit_code;
        assert_eq!(run(r#"{"f1":[1],"f2":[0]}"#), 0);
        assert_eq!(run(r#"{"f1":[0,1],"f2":[-0.25,0,1]}"#), 2);
        assert_eq!(run(r#"{"f1":[0,1],"f2":[0,1]}"#), 3);
    }

    #[test]
    fn convergence_needs_two_sizes() {
        let p = Problem::parse(r#"{"f1":[1],"f2":[0]}"#).unwrap();
        let e = cmd_convergence(&p, &[129], &SynthConfig::default()).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        let rows = cmd_convergence(&p, &[65, 129], &SynthConfig::default()).unwrap();
        for r in &rows {
            assert_eq!(r.residual_sup, Some(0.0));
            assert_eq!(r.g1_dbar_sup, Some(0.0));
        }
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with(CONVERGENCE_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }
}
