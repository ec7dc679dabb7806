//! The five subcommands: sample, learn, mi, eval, dot.

use std::path::Path;

use polytree::model::io::load_explicit_json;
use polytree::orient::{DEFAULT_EXACT_EPSILON_BITS, DEFAULT_GTEST_ALPHA};
use polytree::skeleton::{DEFAULT_EMPIRICAL_TIE_TOLERANCE_BITS, DEFAULT_EXACT_TIE_TOLERANCE_BITS};
use polytree::{
    complete_orientation, compute_weights, conditional_mutual_information, fit_parameters,
    mutual_information, mwst, pair_marginal, recover_directions, triple_marginal, Dataset,
    DistributionSource, Error, IndependenceOracle, OrientationOverride, Polytree,
};

use crate::dot::render;
use crate::result::{evaluate, ResultFile};
use crate::{CliError, DotArgs, EvalArgs, LearnArgs, MiArgs, OracleKind, SampleArgs};

pub fn sample(args: SampleArgs) -> Result<(), CliError> {
    let model = Polytree::load_json(&args.model)?;
    let data = model.sample(args.rows, args.seed)?;
    data.save_csv(&args.output)?;
    eprintln!(
        "wrote {} rows over {} variables to {}",
        args.rows,
        model.n_variables(),
        args.output.display()
    );
    Ok(())
}

pub fn learn(args: LearnArgs) -> Result<(), CliError> {
    let src = load_source(
        args.model.as_deref(),
        args.jpdf.as_deref(),
        args.data.as_deref(),
    )?;
    if src.n_variables() < 2 {
        return Err(CliError::usage(
            "learning needs at least two variables in the input",
        ));
    }
    let oracle = resolve_oracle(&args, &src)?;
    let tie_tolerance = match args.tie_tolerance {
        Some(t) if t.is_finite() && t > 0.0 => t,
        Some(t) => {
            return Err(CliError::usage(format!(
                "--tie-tolerance must be positive and finite, got {t}"
            )))
        }
        None if src.is_exact() => DEFAULT_EXACT_TIE_TOLERANCE_BITS,
        None => DEFAULT_EMPIRICAL_TIE_TOLERANCE_BITS,
    };

    let weights = compute_weights(&src)?;
    let skeleton = mwst(&weights, tie_tolerance)?;
    let recovered = recover_directions(&src, &skeleton, &oracle, args.degenerate)?;

    let mut warnings: Vec<String> = recovered.warnings().to_vec();
    let mut fitted: Option<Polytree> = None;
    if args.fit {
        let overrides = parse_overrides(&args.orient, &src)?;
        let tree = complete_orientation(&recovered, &overrides, &src, &oracle)?;
        let fit = fit_parameters(&src, &tree, args.smoothing)?;
        warnings.extend_from_slice(&fit.warnings);
        fitted = Some(fit.model);
    }

    let result = ResultFile::build(&src, &weights, &recovered, warnings, fitted.as_ref());
    result.save(&args.output)?;
    if let Some(path) = &args.dot {
        write_text(path, &render(&result))?;
    }
    if let Some(path) = &args.model_out {
        fitted
            .as_ref()
            .expect("--model-out requires --fit")
            .save_json(path)
            .map_err(CliError::Lib)?;
    }

    let directed = result
        .edges
        .iter()
        .filter(|e| e.is_directed())
        .count();
    eprintln!(
        "learned {} skeleton edges ({} directed, {} undetermined), {} warning(s); result in {}",
        result.skeleton.len(),
        directed,
        result.skeleton.len() - directed,
        result.warnings.len(),
        args.output.display()
    );
    Ok(())
}

pub fn mi(args: MiArgs) -> Result<(), CliError> {
    let src = load_source(
        args.model.as_deref(),
        args.jpdf.as_deref(),
        args.data.as_deref(),
    )?;
    let a = resolve_name(&src, &args.a)?;
    let b = resolve_name(&src, &args.b)?;
    let bits = match &args.given {
        None => {
            if a == b {
                return Err(CliError::usage("the two variables must be distinct"));
            }
            mutual_information(&pair_marginal(&src, a, b)?)
        }
        Some(given) => {
            let c = resolve_name(&src, given)?;
            if a == b || a == c || b == c {
                return Err(CliError::usage("the variables must be pairwise distinct"));
            }
            conditional_mutual_information(&triple_marginal(&src, a, b, c)?)
        }
    };
    println!("{bits:.6}");
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let result = ResultFile::load(&args.result)?;
    let truth = Polytree::load_json(&args.truth)?;
    let report = evaluate(&result, &truth)?;
    let text = report.to_json_string();
    match &args.output {
        Some(path) => {
            write_text(path, &text)?;
            eprintln!("report in {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn dot(args: DotArgs) -> Result<(), CliError> {
    let result = ResultFile::load(&args.result)?;
    let text = render(&result);
    match &args.output {
        Some(path) => {
            write_text(path, &text)?;
            eprintln!("DOT in {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Loads the single input the argument group guarantees is present.
fn load_source(
    model: Option<&Path>,
    jpdf: Option<&Path>,
    data: Option<&Path>,
) -> Result<DistributionSource, CliError> {
    if let Some(path) = model {
        Ok(DistributionSource::from_model(Polytree::load_json(path)?))
    } else if let Some(path) = jpdf {
        Ok(load_explicit_json(path)?)
    } else {
        let path = data.expect("clap enforces one input kind");
        Ok(DistributionSource::empirical(Dataset::load_csv(path)?))
    }
}

/// Picks and configures the independence oracle, defaulting by source kind
/// and rejecting parameters that belong to a different oracle.
fn resolve_oracle(
    args: &LearnArgs,
    src: &DistributionSource,
) -> Result<IndependenceOracle, CliError> {
    let kind = args.oracle.unwrap_or(if src.is_exact() {
        OracleKind::Exact
    } else {
        OracleKind::Gtest
    });
    let reject = |flag: &str, kind: &str| {
        CliError::usage(format!("--{flag} does not apply to the {kind} oracle"))
    };
    match kind {
        OracleKind::Exact => {
            if args.tau.is_some() {
                return Err(reject("tau", "exact"));
            }
            if args.alpha.is_some() {
                return Err(reject("alpha", "exact"));
            }
            if !src.is_exact() {
                return Err(CliError::Lib(Error::OracleConfig(
                    "the exact oracle assumes noiseless information values; sampled \
                     data needs --oracle fixed or --oracle gtest"
                        .into(),
                )));
            }
            let epsilon = args.epsilon.unwrap_or(DEFAULT_EXACT_EPSILON_BITS);
            Ok(IndependenceOracle::exact_threshold(epsilon)?)
        }
        OracleKind::Fixed => {
            if args.epsilon.is_some() {
                return Err(reject("epsilon", "fixed"));
            }
            if args.alpha.is_some() {
                return Err(reject("alpha", "fixed"));
            }
            let tau = args
                .tau
                .ok_or_else(|| CliError::usage("--oracle fixed needs --tau <BITS>"))?;
            Ok(IndependenceOracle::fixed_threshold(tau)?)
        }
        OracleKind::Gtest => {
            if args.epsilon.is_some() {
                return Err(reject("epsilon", "gtest"));
            }
            if args.tau.is_some() {
                return Err(reject("tau", "gtest"));
            }
            let count = src.sample_count().ok_or_else(|| {
                CliError::Lib(Error::OracleConfig(
                    "the G-test judges sampling noise and needs an empirical source; \
                     use --oracle exact or --oracle fixed for exact inputs"
                        .into(),
                ))
            })?;
            let alpha = args.alpha.unwrap_or(DEFAULT_GTEST_ALPHA);
            Ok(IndependenceOracle::g_test(alpha, count)?)
        }
    }
}

/// Parses `--orient FROM:TO` pairs into index assignments.
fn parse_overrides(
    specs: &[String],
    src: &DistributionSource,
) -> Result<OrientationOverride, CliError> {
    let mut assignments = Vec::with_capacity(specs.len());
    for spec in specs {
        let (from, to) = spec.split_once(':').ok_or_else(|| {
            CliError::usage(format!(
                "--orient takes FROM:TO (two variable names), got {spec:?}"
            ))
        })?;
        let from = resolve_name(src, from.trim())?;
        let to = resolve_name(src, to.trim())?;
        assignments.push((from, to));
    }
    Ok(OrientationOverride::new(assignments))
}

fn resolve_name(src: &DistributionSource, name: &str) -> Result<usize, CliError> {
    src.variables()
        .iter()
        .position(|v| v.name() == name)
        .ok_or_else(|| {
            let known: Vec<&str> = src.variables().iter().map(|v| v.name()).collect();
            CliError::usage(format!(
                "unknown variable {name:?}; the input defines: {}",
                known.join(", ")
            ))
        })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| {
        CliError::Lib(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}
