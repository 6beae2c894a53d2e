use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qex_cli::{run, CommandKind, ExperimentConfig};
use qex_core::RngSpec;
use serde::Serialize;
use serde_json::Value;

/// Quantum expander experiments.
///
/// Tuple arguments accept `pauli`, `iz`, `weyl:N`, `identity:n:N`,
/// `haar:n:N`, `cyclic:m:s1,s2` or a path to a tuple file.
#[derive(Parser, Debug)]
#[command(name = "qex", version)]
struct Cli {
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Stream index within the seed.
    #[arg(long, global = true)]
    stream: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON experiment config; its fields override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug, Serialize, Default)]
struct NormArgs {
    /// dense, power, lanczos or auto.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SizeArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct TupleArg {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tuple: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct PairArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct AscentArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample a Haar-random tuple.
    SampleHaar(#[command(flatten)] SizeArgs),
    /// Regular representation of a Cayley graph.
    Cayley {
        /// Group presentation file.
        #[arg(long)]
        group: Option<String>,
        /// Order of a cyclic group.
        #[arg(long)]
        cyclic: Option<usize>,
        /// Comma-separated steps for the cyclic group.
        #[arg(long, allow_hyphen_values = true)]
        steps: Option<String>,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Certify a tuple as an expander.
    Certify {
        #[command(flatten)]
        tuple: TupleArg,
        #[arg(long)]
        cert_tol: Option<f64>,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Spectral gap on traceless matrices.
    Gap {
        #[command(flatten)]
        tuple: TupleArg,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Mixing curve of the averaging channel.
    Mix {
        #[command(flatten)]
        tuple: TupleArg,
        #[arg(long)]
        steps: Option<usize>,
        /// Tuple file whose first matrix is the initial state.
        #[arg(long)]
        x0: Option<String>,
    },
    /// Measured separation of two tuples.
    Separate {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Orbit distance of two unitary tuples.
    OrbitDist {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        ascent: AscentArgs,
    },
    /// Strong-separation estimate.
    StrongSep {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        ascent: AscentArgs,
    },
    /// Norming tuple search.
    Norming {
        #[command(flatten)]
        tuple: TupleArg,
        #[command(flatten)]
        ascent: AscentArgs,
    },
    /// Off-diagonal overlap constant of a tuple.
    DeltaOverlap(#[command(flatten)] TupleArg),
    /// cb-distance lower bound.
    DcbBound {
        #[arg(long)]
        delta_strong: Option<f64>,
        #[arg(long = "Delta")]
        big_delta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        tuple: TupleArg,
    },
    /// Greedy separated family of certified Haar tuples.
    Pack {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Admit by strong-separation estimate instead.
        #[arg(long)]
        strong: bool,
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Greedy cover of a Haar sample cloud.
    Cover {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        /// d or d_prime.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Closed-form count bounds.
    Bounds {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Subgaussian tail check of sums of traces.
    Subgauss {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Random-matrix experiments.
    Appendix {
        /// dominance, chi, twirl, hastings or matrix-coeff.
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        size: SizeArgs,
        /// Comma-separated sizes for the dominance grid.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Validate a tuple file.
    Validate(#[command(flatten)] TupleArg),
}

fn merge(map: &mut BTreeMap<String, Value>, part: impl Serialize) -> Result<()> {
    if let Value::Object(obj) = serde_json::to_value(part)? {
        for (k, v) in obj {
            if !v.is_null() {
                map.insert(k, v);
            }
        }
    }
    Ok(())
}

fn flag_params(cmd: Cmd) -> Result<(CommandKind, BTreeMap<String, Value>)> {
    let mut m = BTreeMap::new();
    let opt = |m: &mut BTreeMap<String, Value>, k: &str, v: Option<Value>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    let kind = match cmd {
        Cmd::SampleHaar(s) => {
            merge(&mut m, s)?;
            CommandKind::SampleHaar
        }
        Cmd::Cayley {
            group,
            cyclic,
            steps,
            norm,
        } => {
            opt(&mut m, "group", group.map(Value::from));
            opt(&mut m, "cyclic", cyclic.map(Value::from));
            opt(&mut m, "steps", steps.map(Value::from));
            merge(&mut m, norm)?;
            CommandKind::Cayley
        }
        Cmd::Certify {
            tuple,
            cert_tol,
            norm,
        } => {
            merge(&mut m, tuple)?;
            opt(&mut m, "cert_tol", cert_tol.map(Value::from));
            merge(&mut m, norm)?;
            CommandKind::Certify
        }
        Cmd::Gap { tuple, norm } => {
            merge(&mut m, tuple)?;
            merge(&mut m, norm)?;
            CommandKind::Gap
        }
        Cmd::Mix { tuple, steps, x0 } => {
            merge(&mut m, tuple)?;
            opt(&mut m, "steps", steps.map(Value::from));
            opt(&mut m, "x0", x0.map(Value::from));
            CommandKind::Mix
        }
        Cmd::Separate { pair, norm } => {
            merge(&mut m, pair)?;
            merge(&mut m, norm)?;
            CommandKind::Separate
        }
        Cmd::OrbitDist { pair, ascent } => {
            merge(&mut m, pair)?;
            merge(&mut m, ascent)?;
            CommandKind::OrbitDist
        }
        Cmd::StrongSep { pair, ascent } => {
            merge(&mut m, pair)?;
            merge(&mut m, ascent)?;
            CommandKind::StrongSep
        }
        Cmd::Norming { tuple, ascent } => {
            merge(&mut m, tuple)?;
            merge(&mut m, ascent)?;
            CommandKind::Norming
        }
        Cmd::DeltaOverlap(t) => {
            merge(&mut m, t)?;
            CommandKind::DeltaOverlap
        }
        Cmd::DcbBound {
            delta_strong,
            big_delta,
            n,
            tuple,
        } => {
            opt(&mut m, "delta_strong", delta_strong.map(Value::from));
            opt(&mut m, "Delta", big_delta.map(Value::from));
            opt(&mut m, "n", n.map(Value::from));
            merge(&mut m, tuple)?;
            CommandKind::DcbBound
        }
        Cmd::Pack {
            size,
            eps,
            delta,
            samples,
            strong,
            restarts,
            norm,
        } => {
            merge(&mut m, size)?;
            opt(&mut m, "eps", eps.map(Value::from));
            opt(&mut m, "delta", delta.map(Value::from));
            opt(&mut m, "samples", samples.map(Value::from));
            if strong {
                m.insert("strong".into(), Value::Bool(true));
            }
            opt(&mut m, "restarts", restarts.map(Value::from));
            merge(&mut m, norm)?;
            CommandKind::Pack
        }
        Cmd::Cover {
            size,
            points,
            radius,
            metric,
            restarts,
        } => {
            merge(&mut m, size)?;
            opt(&mut m, "points", points.map(Value::from));
            opt(&mut m, "radius", radius.map(Value::from));
            opt(&mut m, "metric", metric.map(Value::from));
            opt(&mut m, "restarts", restarts.map(Value::from));
            CommandKind::Cover
        }
        Cmd::Bounds { size, delta } => {
            merge(&mut m, size)?;
            opt(&mut m, "delta", delta.map(Value::from));
            CommandKind::Bounds
        }
        Cmd::Subgauss { size, samples } => {
            merge(&mut m, size)?;
            opt(&mut m, "samples", samples.map(Value::from));
            CommandKind::Subgauss
        }
        Cmd::Appendix {
            experiment,
            size,
            dims,
            samples,
            norm,
        } => {
            opt(&mut m, "experiment", experiment.map(Value::from));
            merge(&mut m, size)?;
            opt(&mut m, "dims", dims.map(Value::from));
            opt(&mut m, "samples", samples.map(Value::from));
            merge(&mut m, norm)?;
            CommandKind::Appendix
        }
        Cmd::Validate(t) => {
            merge(&mut m, t)?;
            CommandKind::Validate
        }
    };
    Ok((kind, m))
}

fn build_config(cli: Cli) -> Result<ExperimentConfig> {
    let seed = RngSpec::new(cli.seed.unwrap_or(0), cli.stream.unwrap_or(0));
    let out = cli.out.unwrap_or_else(|| PathBuf::from("qex-out"));
    let from_flags = cli
        .command
        .map(flag_params)
        .transpose()?
        .map(|(kind, params)| ExperimentConfig {
            command: kind,
            params,
            seed,
            out_dir: out.clone(),
        });
    match (cli.config, from_flags) {
        (None, None) => bail!("no command given; see --help"),
        (None, Some(c)) => Ok(c),
        (Some(path), flags) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut file = ExperimentConfig::from_json(&text)
                .with_context(|| format!("in {}", path.display()))?;
            if let Some(f) = flags {
                if f.command != file.command {
                    bail!(
                        "config command {} differs from subcommand {}",
                        file.command.name(),
                        f.command.name()
                    );
                }
                for (k, v) in f.params {
                    file.params.entry(k).or_insert(v);
                }
            }
            Ok(file)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = build_config(cli).and_then(|c| run(&c));
    match result {
        Ok(record) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&record.summary).unwrap_or_default()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
