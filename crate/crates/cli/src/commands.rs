use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use mvbv_core::complexseries::{
    cond_d1_check, cond_d2_defect, cond_d3_probe, cond_d4_partial, lemma12_ratio, two_sided_block_sum,
};
use mvbv_core::relations::relations_matrix;
use mvbv_core::seqclass::certify_mvbvs_search;
use mvbv_core::sineseries::{adversarial_gap, convergence_report, dyadic_levels, pair_grid};
use mvbv_core::spec_io::parse_sequence_value;
use mvbv_core::{
    certify as certify_window, parse_sequence_spec, ClassId, ClassParams, ComplexSequenceProvider, FnSequence,
    LoadedSpec, ProbeThresholds, SequenceProvider, SeriesVerdict,
};

use crate::output::{emit, num, to_json, Csv};
use crate::{InputArgs, OutputArgs};

pub enum Outcome {
    Ok,
    /// An `--assert-*` check or the relations matrix did not hold.
    VerdictFailure(String),
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo = a.trim().parse().map_err(|_| format!("bad lower bound `{a}`"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad upper bound `{b}`"))?;
    if lo > hi {
        return Err(format!("lower bound {lo} exceeds upper bound {hi}"));
    }
    Ok((lo, hi))
}

fn load(input: &InputArgs) -> anyhow::Result<LoadedSpec> {
    match (&input.spec, &input.builtin) {
        (Some(path), _) => {
            parse_sequence_spec(path).with_context(|| format!("reading sequence spec {}", path.display()))
        }
        (None, Some(name)) => {
            let mut params = Map::new();
            let mut put = |key: &str, v: Option<Value>| {
                if let Some(v) = v {
                    params.insert(key.to_string(), v);
                }
            };
            put("p", input.p.map(Value::from));
            put("c", input.c.map(Value::from));
            put("alpha", input.alpha.map(Value::from));
            put("j_max", input.jmax.map(Value::from));
            put("k_max", input.kmax.map(Value::from));
            put("growth", input.growth_scale.map(|s| json!({"type": "log2_ceil", "scale": s})));
            let spec = json!({"type": "builtin", "name": name, "params": params});
            parse_sequence_value(&spec).with_context(|| format!("building builtin `{name}`"))
        }
        (None, None) => bail!("one of --spec or --builtin is required"),
    }
}

fn load_real(input: &InputArgs) -> anyhow::Result<LoadedSpec> {
    let spec = load(input)?;
    if spec.real().is_none() {
        bail!("this subcommand needs a real sequence, got a complex spec");
    }
    Ok(spec)
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// MS, CQMS, RVQMS, RBVS, GBVS, NBVS, AMS or MVBVS.
    #[arg(long)]
    class: ClassId,
    /// Window ratio for MVBVS; omitted means the best of 2, 3, 5, 8.
    #[arg(long)]
    lambda: Option<f64>,
    /// Group length for GBVS.
    #[arg(long, default_value_t = 1)]
    n0: u64,
    /// Exponent for CQMS.
    #[arg(long, default_value_t = 1.0)]
    cq_alpha: f64,
    /// Regulator R(n) = n^q for RVQMS.
    #[arg(long, default_value_t = 1.0)]
    regulator_power: f64,
    /// Truncation index for RBVS / AMS tails.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, value_parser = parse_range, value_name = "LO:HI")]
    window: (u64, u64),
    /// Exit with status 2 unless the verdict is member_on_window.
    #[arg(long)]
    assert_member: bool,
}

pub fn certify(a: CertifyArgs) -> anyhow::Result<Outcome> {
    let spec = load_real(&a.input)?;
    let seq = spec.real().expect("checked real");
    let mut params = match a.class {
        ClassId::Mvbvs => a.lambda.map(ClassParams::mvbvs),
        ClassId::Gbvs => Some(ClassParams::gbvs(a.n0)),
        ClassId::Cqms => Some(ClassParams::cqms(a.cq_alpha)),
        ClassId::Rvqms => {
            let q = a.regulator_power;
            let r = FnSequence::new(format!("n^{q}"), move |n| (n as f64).powf(q));
            Some(ClassParams::rvqms(Arc::new(r)))
        }
        other => Some(ClassParams::new(other)),
    };
    if let (Some(p), Some(h)) = (params.as_mut(), a.horizon) {
        *p = p.clone().with_horizon(h);
    }
    let cert = match params {
        Some(p) => certify_window(seq.as_ref(), &p, a.window)?,
        None => certify_mvbvs_search(seq.as_ref(), a.window)?,
    };
    emit(a.output.out.as_deref(), None, &(cert.to_json() + "\n"))?;
    if a.assert_member && !cert.is_member() {
        return Ok(Outcome::VerdictFailure(format!(
            "{} on {:?}: {}",
            cert.class_id(),
            cert.window(),
            cert.verdict.as_str()
        )));
    }
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Number of leading terms to write; defaults to min(length, 4096).
    #[arg(long)]
    terms: Option<u64>,
}

pub fn generate(a: GenerateArgs) -> anyhow::Result<Outcome> {
    let spec = load_real(&a.input)?;
    let LoadedSpec::Real { seq, builtin, source } = &spec else { unreachable!() };
    let n = match (a.terms, seq.known_length()) {
        (Some(n), Some(len)) if n > len => bail!("--terms {n} exceeds the sequence length {len}"),
        (Some(n), _) => n,
        (None, Some(len)) => len.min(4096),
        (None, None) => 4096,
    };
    if n == 0 {
        bail!("--terms must be at least 1");
    }
    let values = seq.terms(1, n)?;
    let mut csv = Csv::new("k,a_k");
    for (k, v) in (1u64..).zip(&values) {
        csv.row(&[k.to_string(), num(*v)]);
    }
    let sidecar = json!({
        "tool": "mvbvlab",
        "version": mvbv_core::VERSION,
        "label": seq.label(),
        "spec": source,
        "terms": n,
        "known_length": seq.known_length(),
        "schedule": builtin.as_ref().map(|b| b.schedule()).unwrap_or_default(),
    });
    emit(a.output.out.as_deref(), Some(&csv), &to_json(&sidecar)?)?;
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Dyadic exponents: pairs (2^e, 2^(e+1)) for LO <= e <= HI.
    #[arg(long, value_parser = parse_range, value_name = "LO:HI", default_value = "4:12")]
    levels: (u64, u64),
    #[arg(long, default_value_t = ProbeThresholds::default().divergence_floor)]
    divergence_floor: f64,
    #[arg(long, default_value_t = ProbeThresholds::default().convergence_ceiling)]
    convergence_ceiling: f64,
    /// Exit with status 2 unless the verdict is uniformly_convergent_evidence.
    #[arg(long)]
    assert_convergent: bool,
}

pub fn converge(a: ConvergeArgs) -> anyhow::Result<Outcome> {
    let spec = load_real(&a.input)?;
    let LoadedSpec::Real { seq, builtin, .. } = &spec else { unreachable!() };
    if a.levels.1 > 40 {
        bail!("--levels: exponent {} is too large", a.levels.1);
    }
    let thresholds = ProbeThresholds {
        divergence_floor: a.divergence_floor,
        convergence_ceiling: a.convergence_ceiling,
    };
    let levels = dyadic_levels(a.levels.0 as u32, a.levels.1 as u32);
    let mut probe = convergence_report(seq.as_ref(), &levels, thresholds)?;
    if let Some(sched) = builtin.as_ref().and_then(|b| b.block_schedule()) {
        let reach = 2 * levels.last().copied().unwrap_or(1);
        for j in 2..=sched.deepest_generation() {
            if 4 * sched.generation_start(j + 1) - 1 > reach {
                break;
            }
            probe.adversarial_points.push(adversarial_gap(sched, j)?);
        }
    }
    let mut csv = Csv::new("pair_n,pair_m,sup_gap");
    for (&(n, m), &g) in probe.pairs.iter().zip(&probe.gaps) {
        csv.row(&[n.to_string(), m.to_string(), num(g)]);
    }
    emit(a.output.out.as_deref(), Some(&csv), &to_json(&probe)?)?;
    if a.assert_convergent && probe.verdict != SeriesVerdict::UniformlyConvergentEvidence {
        return Ok(Outcome::VerdictFailure(format!("{}: {}", probe.label, probe.verdict.as_str())));
    }
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct DivergeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn diverge_demo(a: DivergeArgs) -> anyhow::Result<Outcome> {
    let spec = load_real(&a.input)?;
    let LoadedSpec::Real { seq, builtin, .. } = &spec else { unreachable!() };
    let sched = builtin
        .as_ref()
        .and_then(|b| b.block_schedule())
        .ok_or_else(|| anyhow!("diverge-demo needs a block construction (builtin thm1 or thm6)"))?;
    let mut csv = Csv::new("j,n_j,t_j,gap,sqrt_log_scale");
    let mut points = Vec::new();
    for j in 2..=sched.deepest_generation() {
        let p = adversarial_gap(sched, j)?;
        csv.row(&[p.j.to_string(), p.n_j.to_string(), num(p.t_j), num(p.gap), num(p.scale)]);
        points.push(json!({
            "j": p.j, "n_j": p.n_j, "t_j": p.t_j, "gap": p.gap,
            "sqrt_log_scale": p.scale, "normalized_gap": p.normalized(),
        }));
    }
    let sidecar = json!({
        "label": seq.label(),
        "schedule": sched.schedule(),
        "points": points,
    });
    emit(a.output.out.as_deref(), Some(&csv), &to_json(&sidecar)?)?;
    Ok(Outcome::Ok)
}

#[derive(Debug, Args)]
pub struct RelationsArgs {
    #[command(flatten)]
    output: OutputArgs,
}

pub fn relations(a: RelationsArgs) -> anyhow::Result<Outcome> {
    let table = relations_matrix()?;
    let mut csv = Csv::new("witness,class,expected_member,verdict,constant_estimate,growth_slope,match");
    for c in &table.cells {
        csv.row(&[
            c.witness.clone(),
            c.class.clone(),
            c.expected_member.to_string(),
            c.verdict.as_str().to_string(),
            num(c.constant_estimate),
            num(c.growth_slope),
            c.matches.to_string(),
        ]);
    }
    match a.output.out.as_deref() {
        Some(prefix) => emit(Some(prefix), Some(&csv), &to_json(&table)?)?,
        None => print!("{}", render_table(&table)),
    }
    let bad: Vec<String> = table
        .mismatches()
        .map(|c| format!("{} / {}: expected {}, got {}", c.witness, c.class, member_word(c.expected_member), c.verdict.as_str()))
        .collect();
    if bad.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::VerdictFailure(bad.join("; ")))
    }
}

fn member_word(m: bool) -> &'static str {
    if m {
        "member"
    } else {
        "non-member"
    }
}

fn render_table(table: &mvbv_core::relations::RelationsTable) -> String {
    let mut witnesses: Vec<&str> = Vec::new();
    for c in &table.cells {
        if !witnesses.contains(&c.witness.as_str()) {
            witnesses.push(&c.witness);
        }
    }
    let wcol = witnesses.iter().map(|w| w.len()).max().unwrap_or(0);
    let mut out = format!("{:wcol$}", "");
    for col in &table.columns {
        out.push_str(&format!("  {col:>w$}", w = col.len().max(4)));
    }
    out.push('\n');
    for w in &witnesses {
        out.push_str(&format!("{w:wcol$}"));
        for col in &table.columns {
            let cell = table.cells.iter().find(|c| c.witness == *w && &c.class == col).expect("full matrix");
            let mark = match (cell.verdict.as_str(), cell.matches) {
                ("member_on_window", true) => "yes",
                ("rejected", true) => "no",
                (_, _) => "MISMATCH",
            };
            out.push_str(&format!("  {mark:>w$}", w = col.len().max(4)));
        }
        out.push('\n');
    }
    let bad = table.mismatches().count();
    out.push_str(&format!("{} cells, {} mismatches\n", table.cells.len(), bad));
    out
}

#[derive(Debug, Args)]
pub struct ComplexArgs {
    /// JSON spec with `theta0` and `[k, re, im]` terms.
    #[arg(long)]
    spec: std::path::PathBuf,
    #[command(flatten)]
    output: OutputArgs,
    /// Window ratio of the variation condition.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Largest index examined; defaults to the largest index in the spec.
    #[arg(long)]
    n_max: Option<u64>,
}

pub fn complex_check(a: ComplexArgs) -> anyhow::Result<Outcome> {
    let spec = parse_sequence_spec(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let LoadedSpec::Complex(cseq) = spec else {
        bail!("complex-check needs a complex spec (theta0 plus [k, re, im] terms)");
    };
    let bound = cseq.known_bound().unwrap_or(0);
    let n_max = a.n_max.unwrap_or(bound);
    if n_max > bound {
        bail!("--n-max {n_max} exceeds the largest index {bound} of the spec");
    }
    if n_max == 0 {
        bail!("the spec has no nonzero indices");
    }
    let theta0 = cseq.theta0();
    let d1 = cond_d1_check(cseq.as_ref(), n_max)?;
    let mut d2 = Vec::new();
    let mut n = 1u64;
    while 2 * n + 1 <= n_max && (a.lambda * n as f64).floor() as u64 <= n_max {
        d2.push(json!([n, crate::output::num(cond_d2_defect(cseq.as_ref(), n, a.lambda)?)]));
        n += 1;
    }
    let checkpoints: Vec<u64> = std::iter::successors(Some(1u64), |&c| c.checked_mul(2))
        .take_while(|&c| c <= n_max)
        .collect();
    let d3 = cond_d3_probe(cseq.as_ref(), &checkpoints, n_max)?;
    let d4 = cond_d4_partial(cseq.as_ref(), n_max)?;
    let mut max_ratio: f64 = 1.0;
    for k in (1..=n_max as i64).flat_map(|k| [k, -k]) {
        let z = cseq.term(k)?;
        if z.norm() > 0.0 {
            if let Ok(r) = lemma12_ratio(z, theta0) {
                max_ratio = max_ratio.max(r);
            }
        }
    }
    let mut csv = Csv::new("pair_n,pair_m,sup_gap_re,sup_gap_im");
    let mut pairs = Vec::new();
    let mut n = 1u64;
    while 2 * n <= n_max {
        let grid = pair_grid(n, 2 * n, &[]);
        let gaps = grid
            .par_iter()
            .map(|&x| two_sided_block_sum(cseq.as_ref(), n + 1, 2 * n, x).map(|z| (z.re.abs(), z.im.abs())))
            .collect::<mvbv_core::Result<Vec<_>>>()?;
        let re = gaps.iter().map(|g| g.0).fold(0.0, f64::max);
        let im = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
        csv.row(&[n.to_string(), (2 * n).to_string(), num(re), num(im)]);
        pairs.push(json!({"pair_n": n, "pair_m": 2 * n, "sup_gap_re": re, "sup_gap_im": im}));
        n *= 2;
    }
    let report = json!({
        "label": cseq.label(),
        "theta0": theta0,
        "n_max": n_max,
        "sector": d1,
        "variation": {"lambda": a.lambda, "defects": d2},
        "tail_profile": d3,
        "symmetric_sum": d4,
        "modulus_ratio": {"max": max_ratio, "bound": 1.0 / theta0.cos()},
        "pairs": pairs,
    });
    emit(a.output.out.as_deref(), Some(&csv), &to_json(&report)?)?;
    Ok(Outcome::Ok)
}
