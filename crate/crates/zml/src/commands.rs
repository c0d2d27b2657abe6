//! Command bodies. Each returns the bytes to emit, the default file name and
//! the exit code.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use zml_core::automorphic::AutomorphicForm;
use zml_core::fuchsian::{
    lemma3_partial_sum, lemma3_uniform_bound, surface_group_generators, DEFAULT_ELEMENT_CAP,
};
use zml_core::magnetics::FieldConfig;
use zml_core::quadrature::Quadrature;
use zml_core::zeromodes::{
    assess_lattice, assess_radial, partial_norm, uniform_spectrum, zero_mode_predicate, Certification,
    GrowthModel, LatticeIntegrator, Prediction, SpinSector, TestFunction, TestKind, VerdictStatus,
    ZeroModeVerdict, LATTICE_CUTOFFS, RADIAL_CUTOFFS,
};
use zml_core::DiscPoint;

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::output::{csv_document, RunManifest};

pub struct Output {
    pub bytes: Vec<u8>,
    pub file_name: &'static str,
    pub exit_code: u8,
}

fn done(bytes: Vec<u8>, file_name: &'static str) -> Output {
    Output {
        bytes,
        file_name,
        exit_code: 0,
    }
}

/// Parses `x` or `start:stop:step` (inclusive).
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("malformed range {text:?}; expected x or start:stop:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [a, b, h] if a.is_finite() && b >= a && h > 0.0 && ((b - a) / h) < 1e6 => {
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        _ => Err(bad()),
    }
}

/// Parses `x,y` as a disc point.
pub fn parse_point(text: &str) -> Result<DiscPoint, CliError> {
    let bad = || CliError::Usage(format!("malformed point {text:?}; expected re,im inside the unit disc"));
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y] => DiscPoint::new(x, y).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

pub fn parse_sector(text: &str) -> Result<SpinSector, CliError> {
    match text {
        "plus" => Ok(SpinSector::Plus),
        "minus" => Ok(SpinSector::Minus),
        _ => Err(CliError::Usage(format!("sector must be plus or minus, got {text:?}"))),
    }
}

fn sector_name(s: SpinSector) -> &'static str {
    match s {
        SpinSector::Plus => "plus",
        SpinSector::Minus => "minus",
    }
}

pub fn spectrum(range: &str, sector: &str) -> Result<Output, CliError> {
    let strengths = parse_range(range)?;
    let sec = parse_sector(sector)?;
    if strengths.iter().any(|b| !(*b > 0.0)) {
        return Err(CliError::Usage("field strengths must be positive".into()));
    }
    let mut rows = Vec::new();
    for &b in &strengths {
        let s = uniform_spectrum(b, sec)?;
        for (n, e) in s.eigenvalues {
            rows.push(vec![b.to_string(), n.to_string(), e.to_string(), s.continuum_edge.to_string()]);
        }
    }
    let manifest = RunManifest::new("spectrum").param("B", range).param("sector", sector);
    Ok(done(csv_document(&["B", "n", "E_n", "continuum_edge"], &rows, &manifest)?, "spectrum.csv"))
}

pub struct Lemma3Args {
    pub genus: u32,
    pub d: f64,
    pub max_len: u32,
    pub epsilon: Option<f64>,
    pub z0: String,
    pub max_elements: usize,
}

pub fn lemma3(a: &Lemma3Args) -> Result<Output, CliError> {
    let z0 = parse_point(&a.z0)?;
    let epsilon = a.epsilon.unwrap_or(0.5 / a.d);
    let bound = lemma3_uniform_bound(a.d, epsilon).map_err(zml_core::Error::from)?;
    let group = surface_group_generators(a.genus)
        .map_err(zml_core::Error::from)?
        .with_cap(a.max_elements)
        .enumerate_elements(a.max_len)
        .map_err(zml_core::Error::from)?;
    let orbit = group.orbit(z0, a.max_len).map_err(zml_core::Error::from)?;
    let report = lemma3_partial_sum(&orbit, a.d).map_err(zml_core::Error::from)?;
    let rows: Vec<Vec<String>> = (0..report.shell_sums.len())
        .map(|l| {
            vec![
                l.to_string(),
                report.shell_sums[l].to_string(),
                report.partial_sums[l].to_string(),
                bound.to_string(),
            ]
        })
        .collect();
    let manifest = RunManifest::new("lemma3")
        .param("genus", a.genus)
        .param("d", a.d)
        .param("max_len", a.max_len)
        .param("epsilon", epsilon)
        .param("z0", &a.z0)
        .param("max_elements", a.max_elements);
    Ok(done(
        csv_document(&["L", "shell_sum", "partial_sum", "bound"], &rows, &manifest)?,
        "lemma3.csv",
    ))
}

pub struct ZeroModeArgs {
    pub config: PathBuf,
    pub sector: String,
    pub f_power: u32,
    pub inverse_form: bool,
    pub cutoffs: Option<String>,
    pub rel_tol: f64,
}

fn parse_cutoffs(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("malformed cutoff list {text:?}")))
        })
        .collect()
}

fn verdict_json(v: &ZeroModeVerdict) -> (Value, Value) {
    let status = match v.status {
        VerdictStatus::ConvergedNorm { value, error } => {
            json!({"kind": "ConvergedNorm", "value": value, "error": error})
        }
        VerdictStatus::CertifiedDivergent {
            growth_exponent,
            fit_residual,
        } => json!({"kind": "CertifiedDivergent", "growth_exponent": growth_exponent, "fit_residual": fit_residual}),
    };
    let fit = match v.fit {
        Some(f) => json!({
            "model": match f.model {
                GrowthModel::Power => "power",
                GrowthModel::Logarithmic => "log",
                GrowthModel::Geometric => "geometric",
            },
            "exponent": f.exponent,
            "residual": f.residual,
        }),
        None => Value::Null,
    };
    (status, fit)
}

pub fn zeromode(a: &ZeroModeArgs) -> Result<Output, CliError> {
    let file = ConfigFile::load(&a.config)?;
    let sector = parse_sector(&a.sector)?;
    let cutoffs = match &a.cutoffs {
        Some(t) => parse_cutoffs(t)?,
        None if file.is_lattice() => LATTICE_CUTOFFS.to_vec(),
        None => RADIAL_CUTOFFS.to_vec(),
    };
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Usage("cutoffs must be increasing".into()));
    }
    if !(a.rel_tol > 0.0 && a.rel_tol < 1.0) {
        return Err(CliError::Usage("--rel-tol must lie in (0, 1)".into()));
    }
    let f = if a.inverse_form {
        TestFunction::inverse_form(sector)
    } else {
        TestFunction::monomial(a.f_power, sector)
    };
    let settings = Certification {
        quadrature: Quadrature::default().with_rel_tol(a.rel_tol),
        ..Certification::default()
    };
    let max_len = if file.is_lattice() {
        if cutoffs.iter().any(|c| *c < 0.0 || c.fract() != 0.0 || *c > 12.0) {
            return Err(CliError::Usage("lattice cutoffs are word lengths between 0 and 12".into()));
        }
        *cutoffs.last().expect("nonempty") as u32
    } else {
        if cutoffs.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
            return Err(CliError::Usage("radial cutoffs must lie in (0, 1)".into()));
        }
        0
    };
    let config = file.build(max_len)?;
    let partials: Vec<(f64, f64)> = match &config {
        FieldConfig::AutomorphicLattice { form, theta } => {
            let integrator = LatticeIntegrator::for_candidate(form.clone(), *theta, sector, &f, &settings.quadrature)?;
            let norms = integrator.folded_norms(max_len)?;
            cutoffs.iter().map(|&c| (c, norms[c as usize].value)).collect()
        }
        _ => cutoffs
            .par_iter()
            .map(|&r| partial_norm(&config, sector, &f, r, &settings.quadrature).map(|v| (r, v)))
            .collect::<Result<_, _>>()?,
    };
    let assessed = if file.is_lattice() {
        assess_lattice(&partials, &settings)
    } else {
        assess_radial(&partials, &settings)
    };
    let (status, fit, exit_code) = match &assessed {
        Ok(v) => {
            let (s, fit) = verdict_json(v);
            (s, fit, 0)
        }
        Err(e @ zml_core::Error::Inconclusive(_)) => (json!({"kind": "Inconclusive", "reason": e.to_string()}), Value::Null, 3),
        Err(e) => return Err(CliError::Numerics(e.clone())),
    };
    let prediction = match zero_mode_predicate(&config, sector) {
        Prediction::Exists => "Exists",
        Prediction::NotExists => "NotExists",
        Prediction::OutOfScope => "OutOfScope",
    };
    let f_json = match f.kind {
        TestKind::Monomial(n) => json!({"kind": "monomial", "power": n, "conjugated": f.conjugated}),
        TestKind::Constant => json!({"kind": "constant", "conjugated": f.conjugated}),
        TestKind::InverseForm => json!({"kind": "inverse_form", "conjugated": f.conjugated}),
    };
    let mut manifest = RunManifest::new("zeromode")
        .param("sector", &a.sector)
        .param("f_power", a.f_power)
        .param("inverse_form", a.inverse_form)
        .param("cutoffs", &cutoffs)
        .param("rel_tol", a.rel_tol);
    manifest.config = Some(a.config.clone());
    let doc = json!({
        "config": file,
        "sector": sector_name(sector),
        "f": f_json,
        "status": status,
        "partials": partials.iter().map(|&(c, v)| [c, v]).collect::<Vec<_>>(),
        "fit": fit,
        "predicate": prediction,
        "manifest": manifest,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(Output {
        bytes,
        file_name: "zeromode.json",
        exit_code,
    })
}

pub fn tessellate(genus: u32, max_len: u32, z0: &str, max_elements: usize) -> Result<Output, CliError> {
    let z = parse_point(z0)?;
    let group = surface_group_generators(genus)
        .map_err(zml_core::Error::from)?
        .with_cap(max_elements)
        .enumerate_elements(max_len)
        .map_err(zml_core::Error::from)?;
    let orbit = group.orbit(z, max_len).map_err(zml_core::Error::from)?;
    let rows: Vec<Vec<String>> = orbit
        .points
        .iter()
        .map(|p| vec![p.word_length.to_string(), p.point.re().to_string(), p.point.im().to_string()])
        .collect();
    let manifest = RunManifest::new("tessellate")
        .param("genus", genus)
        .param("max_len", max_len)
        .param("z0", z0)
        .param("max_elements", max_elements);
    Ok(done(csv_document(&["word_length", "re", "im"], &rows, &manifest)?, "tessellate.csv"))
}

pub struct FormArgs {
    pub genus: u32,
    pub k: u32,
    pub m: u32,
    pub truncation: u32,
    pub grid: usize,
    pub extent: f64,
    pub seed_center: String,
    pub max_elements: usize,
}

pub fn form(a: &FormArgs) -> Result<Output, CliError> {
    if a.grid < 2 || a.grid > 2001 {
        return Err(CliError::Usage("--grid must lie in 2..=2001".into()));
    }
    if !(a.extent > 0.0 && a.extent < 1.0) {
        return Err(CliError::Usage("--extent must lie in (0, 1)".into()));
    }
    let center = parse_point(&a.seed_center)?;
    let group = surface_group_generators(a.genus)
        .map_err(zml_core::Error::from)?
        .with_cap(a.max_elements)
        .enumerate_elements(a.truncation)
        .map_err(zml_core::Error::from)?;
    let form = AutomorphicForm::with_seed_center(Arc::new(group), a.k, a.m, a.truncation, center)?;
    let step = 2.0 * a.extent / (a.grid - 1) as f64;
    let rows: Vec<Vec<String>> = (0..a.grid)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = -a.extent + j as f64 * step;
            let form = &form;
            (0..a.grid).filter_map(move |i| {
                let x = -a.extent + i as f64 * step;
                let z = DiscPoint::new(x, y).ok()?;
                let w = form.evaluate(z).norm();
                Some(vec![x.to_string(), y.to_string(), w.to_string(), form.periodic_r(z).to_string()])
            })
        })
        .collect();
    let manifest = RunManifest::new("form")
        .param("genus", a.genus)
        .param("k", a.k)
        .param("m", a.m)
        .param("seed_power_used", form.seed_power())
        .param("truncation", a.truncation)
        .param("grid", a.grid)
        .param("extent", a.extent)
        .param("seed_center", &a.seed_center)
        .param("max_elements", a.max_elements);
    Ok(done(csv_document(&["re", "im", "absW", "r"], &rows, &manifest)?, "form.csv"))
}

pub const DEFAULT_MAX_ELEMENTS: usize = DEFAULT_ELEMENT_CAP;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1.0").unwrap(), vec![1.0]);
        assert_eq!(parse_range("0.5:1.5:0.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_range("0.1:0.3:0.1").unwrap().len(), 3);
        for bad in ["", "a", "1:2", "2:1:0.5", "0:1:0", "0:1:-1"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("0.1, -0.2").unwrap(), DiscPoint::new(0.1, -0.2).unwrap());
        assert!(parse_point("1,0").is_err());
        assert!(parse_point("0.1").is_err());
    }

    #[test]
    fn spectrum_rows() {
        let out = spectrum("1.0", "plus").unwrap();
        let text = String::from_utf8(out.bytes).unwrap();
        assert!(text.starts_with("B,n,E_n,continuum_edge\n1,0,0,0.25\n"));
        let text = String::from_utf8(spectrum("0.5", "plus").unwrap().bytes).unwrap();
        assert_eq!(text.lines().count(), 2);
        let text = String::from_utf8(spectrum("2.25", "plus").unwrap().bytes).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("2.25,")).count(), 2);
        assert!(matches!(spectrum("0", "plus"), Err(CliError::Usage(_))));
        assert!(matches!(spectrum("1", "up"), Err(CliError::Usage(_))));
    }
}
