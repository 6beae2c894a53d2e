//! Command dispatch. Each handler reads its parameters, rejects unknown
//! ones, runs the owning library operation and writes its artifacts.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use qex_core::expanders::{
    cayley_regular_tuple, certify_with, classical_gap, haar_tuple, identity_tuple, mixing_curve,
    pauli_tuple, weyl_tuple, GroupPresentation,
};
use qex_core::geometry::{
    dcb_lower_bound, delta_overlap, find_norming_tuple, non_orbit_norming_witness, orbit_distance,
    separation, strong_separation_estimate, AscentOptions,
};
use qex_core::linalg::{ginibre, pauli_matrices};
use qex_core::packing::{
    banach_net_bound, crude_packing_bound, distance_matrix, greedy_cover_indices, greedy_pack,
    greedy_packing_count, net_size_bound, packing_upper_bound, subgaussian_tail_check, Admission,
    CoverMetric, PackOptions, MULTIPLICITY_LOWER_FORM,
};
use qex_core::randmat::{
    b_n_estimate, chi_n_estimate, dominance_grid, matrix_coefficient_sum, twirl_identity_check,
    unitary_sum_norm,
};
use qex_core::superop::{dense_cap, spectral_gap_with};
use qex_core::tuple_io::{read_group_file, read_tuple_file};
use qex_core::{c64, ComplexMatrix, MatrixTuple, NormMethod, NormOptions, RngSpec};
use serde_json::{json, Value};

use crate::config::{CommandKind, ExperimentConfig, Params, RunRecord};
use crate::output::{fmt_f64, Artifacts};

type Summary = BTreeMap<String, Value>;

/// Parses and checks a tuple file.
pub fn validate_tuple_file(path: &Path) -> qex_core::Result<MatrixTuple> {
    read_tuple_file(path)
}

/// Resolves a tuple argument: `pauli`, `iz`, `weyl:N`, `identity:n:N`,
/// `haar:n:N` (drawn from `rng`), `cyclic:m:s1,s2,…`, or a tuple file path.
pub fn resolve_tuple(spec: &str, rng: &RngSpec) -> Result<MatrixTuple> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .with_context(|| format!("bad integer {s:?} in tuple spec {spec:?}"))
    };
    Ok(match parts.as_slice() {
        ["pauli"] => pauli_tuple(),
        ["iz"] => {
            let [i, _, _, z] = pauli_matrices();
            MatrixTuple::unitary(vec![i, z])?
        }
        ["weyl", d] => weyl_tuple(num(d)?)?,
        ["identity", n, d] => identity_tuple(num(n)?, num(d)?),
        ["haar", n, d] => haar_tuple(num(n)?, num(d)?, rng)?,
        ["cyclic", m, steps] => {
            cayley_regular_tuple(&GroupPresentation::cyclic(num(m)?, &parse_steps(steps)?)?)?
        }
        _ => validate_tuple_file(Path::new(spec))
            .with_context(|| format!("loading tuple {spec:?}"))?,
    })
}

fn parse_steps(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .with_context(|| format!("bad step {x:?}"))
        })
        .collect()
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .with_context(|| format!("bad size {x:?}"))
        })
        .collect()
}

fn norm_options(p: &Params, default_tol: f64) -> Result<NormOptions> {
    let method: NormMethod = p.str_or("method", "auto")?.parse()?;
    Ok(NormOptions::with_method(method).tol(p.f64_or("tol", default_tol)?))
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs one command and writes `run.json` next to its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let started = now();
    let mut out = Artifacts::new(&config.out_dir)?;
    let mut summary = Summary::new();
    let p = Params::new(&config.params);
    let cmd = config.command;
    let result = match cmd {
        CommandKind::SampleHaar => sample_haar(config, &p, &mut out, &mut summary),
        CommandKind::Cayley => cayley(config, &p, &mut out, &mut summary),
        CommandKind::Certify => certify(config, &p, &mut out, &mut summary),
        CommandKind::Gap => gap(config, &p, &mut out, &mut summary),
        CommandKind::Mix => mix(config, &p, &mut out, &mut summary),
        CommandKind::Separate => separate(config, &p, &mut out, &mut summary),
        CommandKind::OrbitDist => orbit_dist(config, &p, &mut out, &mut summary),
        CommandKind::StrongSep => strong_sep(config, &p, &mut out, &mut summary),
        CommandKind::Norming => norming(config, &p, &mut out, &mut summary),
        CommandKind::DeltaOverlap => overlap(config, &p, &mut out, &mut summary),
        CommandKind::DcbBound => dcb(config, &p, &mut out, &mut summary),
        CommandKind::Pack => pack(config, &p, &mut out, &mut summary),
        CommandKind::Cover => cover(config, &p, &mut out, &mut summary),
        CommandKind::Bounds => bounds(config, &p, &mut out, &mut summary),
        CommandKind::Subgauss => subgauss(config, &p, &mut out, &mut summary),
        CommandKind::Appendix => appendix(config, &p, &mut out, &mut summary),
        CommandKind::Validate => validate(config, &p, &mut out, &mut summary),
    };
    result.with_context(|| format!("command {}", cmd.name()))?;

    let dir = out.dir().to_path_buf();
    let mut artifacts = out.into_list();
    artifacts.push("run.json".into());
    let record = RunRecord {
        config: config.clone(),
        anchor: cmd.anchor().to_string(),
        started,
        finished: now(),
        artifacts,
        summary,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    for a in &record.artifacts {
        if !dir.join(a).exists() {
            bail!("declared artifact {a} was not written");
        }
    }
    Ok(record)
}

fn put(summary: &mut Summary, key: &str, value: impl Into<Value>) {
    summary.insert(key.to_string(), value.into());
}

fn sample_haar(
    c: &ExperimentConfig,
    p: &Params,
    out: &mut Artifacts,
    s: &mut Summary,
) -> Result<()> {
    let n = p.usize("n")?;
    let dim = p.usize("N")?;
    p.finish(c.command)?;
    let t = haar_tuple(n, dim, &c.seed)?;
    out.tuple("tuple.json", &t)?;
    put(s, "n", n);
    put(s, "N", dim);
    put(s, "max_unitarity_residual", t.max_unitarity_residual());
    Ok(())
}

fn cayley(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let group = p.opt_str("group")?;
    let cyclic = p.opt_usize("cyclic")?;
    let steps = p.str_or("steps", "1,-1")?;
    let opts = norm_options(p, 1e-10)?;
    p.finish(c.command)?;
    let g = match (group, cyclic) {
        (Some(path), None) => read_group_file(Path::new(&path))?,
        (None, Some(m)) => GroupPresentation::cyclic(m, &parse_steps(&steps)?)?,
        _ => bail!("params: give exactly one of group (file) or cyclic (order)"),
    };
    let t = cayley_regular_tuple(&g)?;
    let classical = classical_gap(&g)?;
    let quantum = spectral_gap_with(&t, &opts)?;
    out.tuple("tuple.json", &t)?;
    out.json(
        "gaps.json",
        &json!({"classical_gap": classical, "quantum_gap": quantum}),
    )?;
    put(s, "order", g.order);
    put(s, "n", g.n());
    put(s, "classical_gap", classical);
    put(s, "quantum_gap", quantum.value);
    Ok(())
}

fn certify(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let spec = p.str("tuple")?;
    let tol = p.f64_or("cert_tol", 1e-8)?;
    let opts = norm_options(p, 1e-10)?;
    p.finish(c.command)?;
    let t = resolve_tuple(&spec, &c.seed)?;
    let cert = certify_with(&t, tol, &opts)?;
    out.json("certificate.json", &cert)?;
    put(s, "epsilon", cert.epsilon);
    put(s, "gap", cert.gap.value);
    put(s, "ramanujan_slack", cert.ramanujan_slack);
    put(s, "method", cert.gap.method.clone());
    Ok(())
}

fn gap(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let spec = p.str("tuple")?;
    let opts = norm_options(p, 1e-10)?;
    p.finish(c.command)?;
    let t = resolve_tuple(&spec, &c.seed)?;
    let g = spectral_gap_with(&t, &opts)?;
    out.json("gap.json", &g)?;
    put(s, "gap", g.value);
    put(s, "method", g.method.clone());
    put(s, "iterations", g.iterations);
    put(s, "residual", g.residual);
    Ok(())
}

fn mix(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let spec = p.str("tuple")?;
    let steps = p.usize_or("steps", 10)?;
    let x0_path = p.opt_str("x0")?;
    p.finish(c.command)?;
    let t = resolve_tuple(&spec, &c.seed.child(0))?;
    let x0 = match x0_path {
        Some(path) => validate_tuple_file(Path::new(&path))?
            .into_matrices()
            .swap_remove(0),
        None => {
            // Random density matrix.
            let g = ginibre(t.dim(), &mut c.seed.child(1).rng());
            let rho = g.matmul_adjoint(&g);
            let tr = rho.trace().re;
            rho.scale_real(1.0 / tr)
        }
    };
    if x0.dim() != t.dim() {
        bail!("x0 has size {} but the tuple has N = {}", x0.dim(), t.dim());
    }
    let curve = mixing_curve(&t, &x0, steps)?;
    let g = spectral_gap_with(&t, &NormOptions::default())?.value;
    let rate = g / t.n() as f64;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .enumerate()
        .map(|(k, d)| {
            vec![
                k.to_string(),
                fmt_f64(*d),
                fmt_f64(curve[0] * rate.powi(k as i32)),
            ]
        })
        .collect();
    out.csv("mixing.csv", &["k", "residual", "gap_bound"], &rows)?;
    let holds = curve
        .iter()
        .enumerate()
        .all(|(k, d)| *d <= curve[0] * rate.powi(k as i32) * (1.0 + 1e-9) + 1e-12);
    put(s, "initial_distance", curve[0]);
    put(s, "final_distance", *curve.last().expect("nonempty"));
    put(s, "contraction_per_step", rate);
    put(s, "gap_bound_holds", holds);
    Ok(())
}

fn pair(c: &ExperimentConfig, p: &Params) -> Result<(MatrixTuple, MatrixTuple)> {
    let u = resolve_tuple(&p.str("u")?, &c.seed.child(0))?;
    let v = resolve_tuple(&p.str("v")?, &c.seed.child(1))?;
    Ok((u, v))
}

fn ascent(
    c: &ExperimentConfig,
    p: &Params,
    restarts: usize,
    max_iters: usize,
) -> Result<AscentOptions> {
    Ok(AscentOptions {
        restarts: p.usize_or("restarts", restarts)?,
        max_iters: p.usize_or("max_iters", max_iters)?,
        rng: c.seed.child(2),
        ..AscentOptions::default()
    })
}

fn separate(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let (uspec, vspec) = (p.str("u")?, p.str("v")?);
    let opts = norm_options(p, 1e-10)?;
    p.finish(c.command)?;
    let u = resolve_tuple(&uspec, &c.seed.child(0))?;
    let v = resolve_tuple(&vspec, &c.seed.child(1))?;
    let r = separation(&u, &v, &opts)?;
    out.json("separation.json", &r)?;
    put(s, "delta", r.delta);
    put(s, "norm_value", r.norm_value);
    Ok(())
}

fn orbit_dist(
    c: &ExperimentConfig,
    p: &Params,
    out: &mut Artifacts,
    s: &mut Summary,
) -> Result<()> {
    let (u, v) = pair(c, p)?;
    let opts = ascent(c, p, 20, 20_000)?;
    p.finish(c.command)?;
    let sep = separation(&u, &v, &opts.norm)?;
    let r = orbit_distance(&u, &v, &opts)?.with_separation(sep.delta, u.n())?;
    out.json("orbit.json", &json!({"orbit": r, "delta": sep.delta}))?;
    put(s, "upper", r.upper);
    put(s, "lower", r.lower);
    put(s, "delta", sep.delta);
    Ok(())
}

fn strong_sep(
    c: &ExperimentConfig,
    p: &Params,
    out: &mut Artifacts,
    s: &mut Summary,
) -> Result<()> {
    let (u, v) = pair(c, p)?;
    let opts = ascent(c, p, 8, 200)?;
    p.finish(c.command)?;
    let r = strong_separation_estimate(&u, &v, &opts)?;
    out.json("strong_separation.json", &r)?;
    put(s, "estimate", r.estimate);
    put(s, "strong_delta", r.strong_delta);
    put(s, "at_identity", r.at_identity);
    put(s, "note", "ascent estimate; not a certificate");
    Ok(())
}

fn norming(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let spec = p.str("tuple")?;
    let opts = ascent(c, p, 8, 500)?;
    p.finish(c.command)?;
    let x = resolve_tuple(&spec, &c.seed.child(0))?;
    let r = find_norming_tuple(&x, &opts)?;
    out.json("norming.json", &r)?;
    out.tuple("norming_tuple.json", &r.v)?;
    let n = x.n() as f64;
    put(s, "attained", r.attained);
    put(s, "orbit_upper", r.orbit_upper);
    put(s, "in_orbit", r.orbit_upper <= 1e-5 * n.sqrt());
    if let Some(w) = non_orbit_norming_witness(&x, 1e-8)? {
        out.tuple("witness_tuple.json", &w.y)?;
        put(s, "witness_rank", w.rank);
        put(s, "witness_cross_norm", w.cross_norm);
        put(s, "witness_orbit_lower", w.orbit_distance_lower);
    }
    Ok(())
}

fn overlap(c: &ExperimentConfig, p: &Params, _out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let spec = p.str("tuple")?;
    p.finish(c.command)?;
    let t = resolve_tuple(&spec, &c.seed)?;
    put(s, "Delta", delta_overlap(&t)?);
    Ok(())
}

fn dcb(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let delta_strong = p.f64("delta_strong")?;
    let big = p.opt_f64("Delta")?;
    let spec = p.opt_str("tuple")?;
    let n = p.opt_usize("n")?;
    p.finish(c.command)?;
    let (big, n) = match (big, spec) {
        (Some(d), None) => (
            d,
            n.ok_or_else(|| anyhow!("params.n: required with Delta"))?,
        ),
        (None, Some(spec)) => {
            let t = resolve_tuple(&spec, &c.seed)?;
            (delta_overlap(&t)?, t.n())
        }
        _ => bail!("params: give exactly one of Delta (with n) or tuple"),
    };
    let b = dcb_lower_bound(delta_strong, big, n)?;
    out.json("dcb.json", &b)?;
    put(s, "bound", b.bound);
    put(s, "gamma1", b.gamma1);
    put(s, "Delta", b.big_delta);
    Ok(())
}

fn pack(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let mut opts = PackOptions::new(
        p.usize("n")?,
        p.usize("N")?,
        p.f64("eps")?,
        p.f64("delta")?,
        p.usize("samples")?,
        c.seed,
    );
    let restarts = p.usize_or("restarts", 4)?;
    if p.bool_or("strong", false)? {
        opts.admission = Admission::StrongEstimate;
        opts.ascent = AscentOptions {
            restarts,
            max_iters: 200,
            rng: c.seed.child(u64::MAX),
            ..AscentOptions::default()
        };
    }
    opts.norm = norm_options(p, 1e-10)?;
    p.finish(c.command)?;
    let fam = greedy_pack(&opts)?;
    fam.check_invariants()?;
    for (i, m) in fam.members.iter().enumerate() {
        out.tuple(&format!("members/member_{i:04}.json"), m)?;
    }
    let rows: Vec<Vec<String>> = fam
        .pairs()
        .into_iter()
        .map(|(i, j, d)| vec![i.to_string(), j.to_string(), fmt_f64(d)])
        .collect();
    out.csv("family.csv", &["i", "j", "delta_ij"], &rows)?;
    let bound = if opts.delta > 0.0 {
        Some(packing_upper_bound(opts.n, opts.dim, opts.delta)?)
    } else {
        None
    };
    out.json(
        "meta.json",
        &json!({"family": fam, "log_count_bound": bound}),
    )?;
    put(s, "count", fam.count());
    put(
        s,
        "log_count",
        if fam.count() > 0 {
            json!(fam.log_count())
        } else {
            Value::Null
        },
    );
    put(s, "log_count_bound", bound);
    put(s, "rejected", fam.rejected_count);
    put(s, "uncertified", fam.uncertified_count);
    if opts.admission == Admission::StrongEstimate {
        put(
            s,
            "note",
            "admission by strong-separation estimate; not certified",
        );
    }
    Ok(())
}

fn cover(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let n = p.usize("n")?;
    let dim = p.usize("N")?;
    let points = p.usize_or("points", 100)?;
    let radius = p.f64_or("radius", (n as f64).sqrt())?;
    let metric: CoverMetric = p.str_or("metric", "d_prime")?.parse()?;
    let ascent = AscentOptions {
        restarts: p.usize_or("restarts", 3)?,
        max_iters: 500,
        rng: c.seed.child(u64::MAX),
        ..AscentOptions::default()
    };
    p.finish(c.command)?;
    let cloud: Vec<MatrixTuple> = (0..points)
        .map(|i| haar_tuple(n, dim, &c.seed.child(i as u64)))
        .collect::<qex_core::Result<_>>()?;
    let dist = distance_matrix(&cloud, metric, &ascent)?;
    let (centers, covering_radius) = greedy_cover_indices(&dist, radius)?;
    let packed = greedy_packing_count(&dist, 2.0 * radius);
    out.json(
        "cover.json",
        &json!({"radius": radius, "metric": metric, "center_indices": centers, "covering_radius": covering_radius,
                "packing_count_at_2r": packed}),
    )?;
    put(s, "count", centers.len());
    put(s, "covering_radius", covering_radius);
    put(s, "packing_count_at_2r", packed);
    put(s, "duality_holds", centers.len() >= packed);
    Ok(())
}

fn bounds(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let n = p.usize("n")?;
    let dim = p.usize("N")?;
    let deltas = match p.opt_f64("delta")? {
        Some(d) => vec![d],
        None => vec![0.05, 0.1, 0.2, 0.5, 2.0 / 3.0, 0.9],
    };
    p.finish(c.command)?;
    let opt = |r: qex_core::Result<f64>| r.map(fmt_f64).unwrap_or_default();
    let rows: Vec<Vec<String>> = deltas
        .iter()
        .map(|&d| {
            vec![
                fmt_f64(d),
                opt(packing_upper_bound(n, dim, d)),
                opt(crude_packing_bound(n, dim, d)),
                opt(net_size_bound(n, dim, d)),
                if d < 1.0 {
                    opt(banach_net_bound(n, 1.0 / (1.0 - d)))
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    let header = [
        "delta",
        "log_packing_bound",
        "log_packing_bound_crude",
        "log_net_bound",
        "log_scalar_net_bound",
    ];
    println!("{}", header.join("\t"));
    for r in &rows {
        println!("{}", r.join("\t"));
    }
    println!("lower form: {MULTIPLICITY_LOWER_FORM}");
    out.csv("bounds.csv", &header, &rows)?;
    put(s, "rows", rows.len());
    put(s, "multiplicity_lower_form", MULTIPLICITY_LOWER_FORM);
    Ok(())
}

fn subgauss(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let n = p.usize("n")?;
    let dim = p.usize("N")?;
    let samples = p.usize_or("samples", 10_000)?;
    p.finish(c.command)?;
    let t = subgaussian_tail_check(n, dim, samples, &c.seed)?;
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.lambda),
                fmt_f64(r.empirical),
                fmt_f64(r.bound),
                fmt_f64(r.sigma),
                r.flagged.to_string(),
            ]
        })
        .collect();
    out.csv(
        "subgauss.csv",
        &["lambda", "empirical", "bound", "sigma", "flagged"],
        &rows,
    )?;
    out.json("subgauss.json", &t)?;
    put(s, "any_flag", t.any_flag());
    put(s, "k_hat", t.k_hat);
    put(s, "variance", t.variance);
    Ok(())
}

fn appendix(c: &ExperimentConfig, p: &Params, out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let experiment = p.str("experiment")?;
    match experiment.as_str() {
        "chi" => {
            let dim = p.usize_or("N", 64)?;
            let samples = p.usize_or("samples", 200)?;
            p.finish(c.command)?;
            let chi = chi_n_estimate(dim, samples, &c.seed.child(0))?;
            let b = b_n_estimate(dim, samples, &c.seed.child(1))?;
            out.csv(
                "chi.csv",
                &["N", "samples", "estimate", "ci_lo", "ci_hi"],
                &[vec![dim.to_string(), samples.to_string(), fmt_f64(chi.estimate), fmt_f64(chi.ci_lo), fmt_f64(chi.ci_hi)]],
            )?;
            out.json("report.json", &json!({"chi": chi, "b": b}))?;
            put(s, "estimate", chi.estimate);
            put(s, "relative_error", chi.relative_error());
            put(s, "b_estimate", b.estimate);
        }
        "twirl" => {
            let dim = p.usize_or("N", 2)?;
            let samples = p.usize_or("samples", 100_000)?;
            p.finish(c.command)?;
            let r = twirl_identity_check(dim, samples, &c.seed)?;
            out.csv(
                "twirl.csv",
                &["N", "samples", "residual", "off_p_residual", "off_p_trace_mean", "off_p_trace_stderr"],
                &[vec![
                    dim.to_string(),
                    samples.to_string(),
                    fmt_f64(r.residual),
                    fmt_f64(r.off_p_residual),
                    fmt_f64(r.off_p_trace_mean),
                    fmt_f64(r.off_p_trace_stderr),
                ]],
            )?;
            out.json("report.json", &r)?;
            put(s, "residual", r.residual);
            put(s, "off_p_trace_within_3_sigma", r.off_p_trace_within(3.0));
        }
        "dominance" => {
            let n = p.usize_or("n", 4)?;
            let dims = parse_list(&p.str_or("dims", "8,16,32")?)?;
            let samples = p.usize_or("samples", 10)?;
            let opts = norm_options(p, 1e-10)?;
            p.finish(c.command)?;
            let coeffs = vec![c64::new(1.0, 0.0); n];
            let rows = dominance_grid(&coeffs, &dims, samples, &c.seed, &opts)?;
            let csv: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.dim.to_string(), fmt_f64(r.unitary_mean), fmt_f64(r.gaussian_mean), fmt_f64(r.ratio)])
                .collect();
            out.csv("dominance.csv", &["N", "unitary_mean", "gaussian_mean", "ratio"], &csv)?;
            out.json("report.json", &rows)?;
            put(s, "max_ratio", rows.iter().map(|r| r.ratio).fold(0.0, f64::max));
        }
        "hastings" => {
            let n = p.usize_or("n", 4)?;
            let dim = p.usize_or("N", 100)?;
            let samples = p.usize_or("samples", 20)?;
            let opts = norm_options(p, 1e-10)?;
            p.finish(c.command)?;
            let coeffs = vec![c64::new(1.0, 0.0); n];
            let r = unitary_sum_norm(&coeffs, dim, samples, &c.seed, &opts)?;
            let csv: Vec<Vec<String>> = r
                .per_sample
                .iter()
                .enumerate()
                .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
                .collect();
            out.csv("hastings.csv", &["sample", "norm"], &csv)?;
            out.json("report.json", &r)?;
            put(s, "mean", r.mean_norm);
            put(s, "std", r.std_norm);
            put(s, "ci_lo", r.ci_lo);
            put(s, "ci_hi", r.ci_hi);
            put(s, "min", r.per_sample.iter().copied().fold(f64::INFINITY, f64::min));
            put(s, "ramanujan_value", 2.0 * ((n - 1) as f64).sqrt());
        }
        "matrix-coeff" => {
            let k = p.usize_or("n", 3)?;
            let dim = p.usize_or("N", 4)?;
            let samples = p.usize_or("samples", 20)?;
            p.finish(c.command)?;
            // Diagonal matrix units e_jj.
            let mats: Vec<ComplexMatrix> = (0..k)
                .map(|j| ComplexMatrix::from_fn(k, |a, b| if a == j && b == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }))
                .collect();
            let r = matrix_coefficient_sum(&mats, dim, samples, &c.seed, dense_cap())?;
            let csv: Vec<Vec<String>> = r
                .moments
                .per_sample
                .iter()
                .enumerate()
                .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
                .collect();
            out.csv("matrix_coeff.csv", &["sample", "norm"], &csv)?;
            out.json("report.json", &r)?;
            put(s, "mean", r.moments.mean_norm);
            put(s, "rhs", r.rhs);
        }
        other => bail!("params.experiment: unknown experiment {other:?} (expected dominance, chi, twirl, hastings, matrix-coeff)"),
    }
    put(s, "experiment", experiment);
    Ok(())
}

fn validate(c: &ExperimentConfig, p: &Params, _out: &mut Artifacts, s: &mut Summary) -> Result<()> {
    let path = p.str("tuple")?;
    p.finish(c.command)?;
    let t = validate_tuple_file(Path::new(&path))?;
    put(s, "n", t.n());
    put(s, "N", t.dim());
    put(s, "unitary", t.is_unitary());
    put(s, "max_unitarity_residual", t.max_unitarity_residual());
    Ok(())
}
