//! Commands behind the `parabolic-claws` binary.
//!
//! Each command turns parsed input into a [`Report`]. Errors carry the exit
//! status the binary should use: 2 for unreadable or malformed input, 1 for
//! domain failures such as a non-parabolic equation.

mod parse;
mod report;

use std::time::Instant;

use thiserror::Error;

pub use parse::{parse_expr, ParseError, ProblemFile, MAX_DIM};
pub use report::{DimsSection, LawEntry, MaSection, Report, SCHEMA_VERSION};

use crate::claws::{
    cross_validate_ma, find_conservation_laws, jacobi_potential_order, table_for, verify, verify_law, AnsatzSpec,
    ClawsError, ConservationLaw,
};
use crate::jets::{deprolongation_dimension, parabolic_system_dimension, tableau_dimension};
use crate::parabolic::{ma_classify, parabolicity_check, EvolutionEquation, MaReport, ParabolicError, ResidueMode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Equation(#[from] ParabolicError),
    #[error(transparent)]
    Claws(#[from] ClawsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Equation(_) | CliError::Claws(_) => 1,
        }
    }
}

pub const DEFAULT_JET_DEGREE: u32 = 2;
pub const DEFAULT_BASE_DEGREE: u32 = 0;

/// Command-line overrides for the density ansatz; unset fields fall back to
/// the problem file, then to the defaults.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClawsOptions {
    pub jet_degree: Option<u32>,
    pub base_degree: Option<u32>,
    pub order: Option<u32>,
    pub unsafe_order: bool,
    pub force: bool,
    pub symbolic: bool,
}

impl ClawsOptions {
    pub fn spec(&self, file: &ProblemFile) -> AnsatzSpec {
        let spec = AnsatzSpec::new(
            self.order.or(file.order).unwrap_or(crate::claws::SAFE_JET_ORDER),
            self.jet_degree.or(file.jet_degree).unwrap_or(DEFAULT_JET_DEGREE),
            self.base_degree.or(file.base_degree).unwrap_or(DEFAULT_BASE_DEGREE),
        );
        if self.unsafe_order {
            spec.allow_unsafe_order()
        } else {
            spec
        }
    }
}

fn residue_mode(symbolic: bool) -> ResidueMode {
    if symbolic {
        ResidueMode::Symbolic
    } else {
        ResidueMode::AtReference
    }
}

fn ma_section(r: &MaReport) -> MaSection {
    MaSection {
        minor_affine: r.minor_affine,
        residue_vanishes: r.residue_vanishes,
        n1_affine: r.n1_affine,
    }
}

fn classified(file: &ProblemFile, eq: &EvolutionEquation, symbolic: bool) -> Report {
    let mut report = Report::new(file.n);
    report.equation = Some(file.rhs_source());
    report.parabolicity = Some(parabolicity_check(eq).label().to_string());
    let ma = ma_classify(eq, residue_mode(symbolic));
    if ma.singular_symbol {
        report
            .warnings
            .push("symbol is singular at the reference jet; residue test skipped".into());
    }
    report.ma = Some(ma_section(&ma));
    report
}

fn law_entry(law: &ConservationLaw, order: u32, one_dim: bool) -> LawEntry {
    LawEntry {
        density: law.density.render(one_dim),
        flux: law.flux.as_ref().map(|f| f.iter().map(|x| x.render(one_dim)).collect()),
        characteristic: law.characteristic.render(one_dim),
        order,
    }
}

pub fn read_problem(path: &str) -> Result<ProblemFile, CliError> {
    let src = if path == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    }
    .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    Ok(ProblemFile::parse(&src)?)
}

/// Parabolicity and Monge-Ampere verdicts.
pub fn cmd_classify(file: &ProblemFile, symbolic: bool) -> Result<Report, CliError> {
    let start = Instant::now();
    let eq = file.equation()?;
    let mut report = classified(file, &eq, symbolic);
    report.elapsed = Some(start.elapsed());
    Ok(report)
}

/// Conservation-law search with the given bounds.
pub fn cmd_claws(file: &ProblemFile, opts: &ClawsOptions) -> Result<Report, CliError> {
    let start = Instant::now();
    let eq = file.equation()?;
    let mut report = classified(file, &eq, opts.symbolic);
    let result = find_conservation_laws(&eq, &opts.spec(file), opts.force)?;
    report.warnings.extend(result.warnings);
    let table = table_for(&eq)?;
    let one_dim = file.n == 1;
    for law in &result.laws {
        let order = jacobi_potential_order(law, &table)?;
        if law.flux.is_some() && !verify_law(&table, law)? {
            report.warnings.push(format!(
                "law with characteristic {} failed verification",
                law.characteristic.render(one_dim)
            ));
        }
        report.laws.push(law_entry(law, order, one_dim));
    }
    let check = cross_validate_ma(&eq, &result.laws);
    report.warnings.extend(
        check
            .violations
            .into_iter()
            .map(|v| format!("cross-check violation: {v}")),
    );
    report.elapsed = Some(start.elapsed());
    Ok(report)
}

/// Checks a user-supplied law. The report's `verified` field holds the answer.
pub fn cmd_verify(file: &ProblemFile, density: &str, fluxes: &[String]) -> Result<Report, CliError> {
    let start = Instant::now();
    let eq = file.equation()?;
    if fluxes.len() != file.n {
        return Err(CliError::Usage(format!(
            "expected {} flux component(s), got {}",
            file.n,
            fluxes.len()
        )));
    }
    let density = parse_expr(density, file.n)?;
    let flux = fluxes
        .iter()
        .map(|x| parse_expr(x, file.n))
        .collect::<Result<Vec<_>, _>>()?;
    let table = table_for(&eq)?;
    let ok = verify(&table, &density, &flux)?;
    let law = ConservationLaw {
        characteristic: crate::claws::characteristic(&density)?,
        density,
        flux: Some(flux),
    };
    let order = jacobi_potential_order(&law, &table)?;
    let mut report = Report::new(file.n);
    report.equation = Some(file.rhs_source());
    report.laws.push(law_entry(&law, order, file.n == 1));
    report.verified = Some(ok);
    if law.characteristic.is_zero() {
        report
            .warnings
            .push("characteristic vanishes; the law is trivial".into());
    }
    report.elapsed = Some(start.elapsed());
    Ok(report)
}

/// Tableau and exterior-system dimensions.
pub fn cmd_dims(n: usize, r: usize) -> Result<Report, CliError> {
    if n == 0 {
        return Err(CliError::Usage("spatial dimension must be positive".into()));
    }
    let mut report = Report::new(n);
    report.dims = Some(DimsSection {
        r,
        tableau_dim: tableau_dimension(n, r),
        system_dim: parabolic_system_dimension(n),
        deprolongation_dim: deprolongation_dimension(n),
    });
    Ok(report)
}

/// Exit status for a successful report: a failed verification is a domain failure.
pub fn report_exit_code(report: &Report) -> i32 {
    if report.verified == Some(false) {
        1
    } else {
        0
    }
}
