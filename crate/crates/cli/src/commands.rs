use std::time::Instant;

use robustiso::approx::{approximate_ged, approximate_qap, ApproxOptions, LpBackend, Mode, RoundingOptions};
use robustiso::format::{read_graph, read_qap, serialize_qap};
use robustiso::gen::{
    bundle_from_pair, gen_blowup_pair, gen_cfi_pair, gen_lemma36_qap, gen_random_graph, gen_random_graph_with_vc,
    stock_base, InstanceBundle,
};
use robustiso::graph::{edit_distance_bruteforce_capped, DEFAULT_BRUTEFORCE_CAP};
use robustiso::qap::{qap_bruteforce_capped, DEFAULT_QAP_CAP};
use robustiso::rational::format_rational;
use robustiso::setsystem::{
    mixed_system, neighbourhood_system, qap_threshold_system, vc_dimension_exact, weak_vc_test, weighted_graph_vc,
    DEFAULT_WEAK_VC_WORK,
};
use robustiso::wl::{
    distinguishing_colour, homogenising_set_coloured, homogenising_set_net, k_wl_pair, k_wl_stable_budgeted,
    robust_gi_budgeted, wl_distinguishes_budgeted, Answer, HomogenisingMethod, DEFAULT_WL_BUDGET,
};
use robustiso::{Error, Rational, Result};
use serde_json::{json, Value};

use crate::{
    BackendArg, BenchArgs, Cli, Command, GedArgs, GenFamily, ModeArg, OracleArgs, QapArgs, RobustGiArgs, SolverArgs,
    StrategyArg, VcArgs, WlArgs,
};

pub struct Outcome {
    pub json: Value,
    pub code: u8,
}

pub struct Failure {
    pub error: Error,
    pub context: Option<Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, context: None }
    }
}

fn ok(json: Value) -> std::result::Result<Outcome, Failure> {
    Ok(Outcome { json, code: 0 })
}

/// `--budget`, else `ROBUSTISO_BUDGET`, else `None` for per-module defaults.
fn budget(cli: &Cli) -> Result<Option<u128>> {
    if let Some(b) = cli.budget {
        return Ok(Some(b));
    }
    match std::env::var("ROBUSTISO_BUDGET") {
        Ok(text) => text
            .trim()
            .replace('_', "")
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("ROBUSTISO_BUDGET is not an integer: `{text}`"))),
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> std::result::Result<Outcome, Failure> {
    let budget = budget(cli)?;
    match &cli.command {
        Command::Vc(a) => vc(a, budget),
        Command::Ged(a) => ged(a, budget),
        Command::Qap(a) => qap(a, budget),
        Command::RobustGi(a) => robust_gi(a, budget),
        Command::Wl(a) => wl(a, budget),
        Command::Gen(a) => gen(&a.family),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench(a, budget),
    }
}

fn vc(a: &VcArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    if let Some(path) = &a.graph {
        let g = read_graph(path)?;
        let mut out = json!({ "nvc": vc_dimension_exact(&neighbourhood_system(&g))? });
        if g.is_weighted() {
            out["weighted_vc"] = json!(weighted_graph_vc(&g)?);
        }
        if a.mixed {
            out["mvc"] = json!(vc_dimension_exact(&mixed_system(&g))?);
        }
        return ok(out);
    }
    let q = read_qap(a.qap.as_deref().expect("clap enforces --graph or --qap"))?;
    if let Some(d) = a.weak_d {
        let verdict = weak_vc_test(&q, d, budget.unwrap_or(DEFAULT_WEAK_VC_WORK))?;
        return ok(json!({ "weak_vc_le_d": verdict }));
    }
    let thresholds = match &a.threshold {
        Some(t) => vec![t.clone()],
        None => q.thresholds(),
    };
    let mut rows = Vec::new();
    let mut max = -1;
    for t in thresholds {
        let d = vc_dimension_exact(&qap_threshold_system(&q, &t, None)?)?;
        max = max.max(d);
        rows.push(json!({ "t": format_rational(&t), "vc": d }));
    }
    ok(json!({ "threshold_vc": rows, "max_vc": max }))
}

fn approx_options(s: &SolverArgs, budget: Option<u128>, trace: bool) -> ApproxOptions {
    let defaults = ApproxOptions::default();
    ApproxOptions {
        backend: match s.backend {
            BackendArg::Exact => LpBackend::Exact,
            BackendArg::Float => LpBackend::Float,
        },
        rounding: RoundingOptions {
            retries: s.retries,
            zeta_row: s.zeta_row,
        },
        samples_per_size: s.samples,
        trace,
        max_alphas: budget.unwrap_or(defaults.max_alphas),
    }
}

fn mode(s: &SolverArgs) -> Mode {
    match s.mode {
        ModeArg::Exhaustive => Mode::Exhaustive,
        ModeArg::Sampled => Mode::Sampled,
    }
}

fn millis(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn ged(a: &GedArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    let g = read_graph(&a.g)?;
    let h = read_graph(&a.h)?;
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()).into());
    }
    let s = &a.solver;
    let start = Instant::now();
    let approx = approximate_ged(&g, &h, &s.eps, s.m, s.seed, mode(s), &approx_options(s, budget, false))?;
    log::info!(
        "approximation done after {} partial injections",
        approx.report.alphas_tried
    );
    let mut out = json!({
        "n": g.n(),
        "eps": format_rational(&s.eps),
        "m": approx.report.m,
        "seed": s.seed,
        "mode": approx.report.mode,
        "backend": approx.report.backend,
        "approx_cost": format_rational(&approx.cost),
        "bijection": approx.assignment,
        "alphas_tried": approx.report.alphas_tried,
        "lps_infeasible": approx.report.lps_infeasible,
    });
    if g.n() <= s.oracle_cap.min(DEFAULT_BRUTEFORCE_CAP) {
        let (exact, phi) = edit_distance_bruteforce_capped(&g, &h, DEFAULT_BRUTEFORCE_CAP)?;
        out["oracle_cost"] = json!(format_rational(&exact));
        out["oracle_bijection"] = json!(phi);
        out["gap"] = json!(format_rational(&(&approx.cost - &exact)));
    }
    out["timing_ms"] = json!(millis(start));
    ok(out)
}

fn qap(a: &QapArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    let q = read_qap(&a.qap)?;
    let s = &a.solver;
    let start = Instant::now();
    let report = approximate_qap(&q, &s.eps, s.m, s.seed, mode(s), &approx_options(s, budget, a.trace))?;
    let mut out = serde_json::to_value(&report).map_err(Error::from)?;
    if q.n() <= s.oracle_cap.min(DEFAULT_QAP_CAP) {
        let (exact, phi) = qap_bruteforce_capped(&q, DEFAULT_QAP_CAP)?;
        out["oracle_cost"] = json!(format_rational(&exact));
        out["oracle_assignment"] = json!(phi);
        out["gap"] = json!(format_rational(&(&report.best_cost - &exact)));
    }
    out["timing_ms"] = json!(millis(start));
    ok(out)
}

fn strategy(s: StrategyArg) -> HomogenisingMethod {
    match s {
        StrategyArg::Net => HomogenisingMethod::Net,
        StrategyArg::ColouredGreedy => HomogenisingMethod::ColouredGreedy,
    }
}

fn robust_gi(a: &RobustGiArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    let g = read_graph(&a.g)?;
    let h = read_graph(&a.h)?;
    let method = strategy(a.strategy);
    match robust_gi_budgeted(&g, &h, &a.eps, method, budget.unwrap_or(DEFAULT_WL_BUDGET)) {
        Ok(cert) => {
            let code = match cert.answer {
                Answer::Isomorphic => 0,
                Answer::Far => 1,
            };
            Ok(Outcome {
                json: serde_json::to_value(&cert).map_err(Error::from)?,
                code,
            })
        }
        Err(error @ Error::BudgetExceeded { .. }) => {
            let third = &a.eps / Rational::from_integer(3.into());
            let set = match method {
                HomogenisingMethod::Net => homogenising_set_net(&g, &third)?,
                HomogenisingMethod::ColouredGreedy => homogenising_set_coloured(&g, &third)?,
            };
            Err(Failure {
                error,
                context: Some(json!({ "k": set.vertices.len() + 1, "S": set.vertices })),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn wl(a: &WlArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    let g = read_graph(&a.g)?;
    let budget = budget.unwrap_or(DEFAULT_WL_BUDGET);
    let Some(h_path) = &a.h else {
        let c = k_wl_stable_budgeted(&g, a.k, budget)?;
        return ok(json!({
            "k": a.k,
            "class_count": c.class_count(),
            "rounds": c.rounds,
            "histogram": c.histogram,
        }));
    };
    let h = read_graph(h_path)?;
    let distinguishes = wl_distinguishes_budgeted(&g, &h, a.k, budget)?;
    let mut out = json!({ "k": a.k, "distinguishes": distinguishes });
    if a.k == 1 || a.k < g.n() {
        let (cg, ch) = k_wl_pair(&g, &h, a.k, budget)?;
        out["class_counts"] = json!([cg.class_count(), ch.class_count()]);
        out["distinguishing_colour"] = json!(distinguishing_colour(&cg, &ch));
    }
    ok(out)
}

fn save_bundle(bundle: &InstanceBundle, out: &str) -> std::result::Result<Outcome, Failure> {
    bundle.save(out)?;
    log::info!("wrote bundle to {out}");
    ok(json!({
        "family": bundle.metadata.family,
        "out": out,
        "n": bundle.g.n(),
        "edges": [bundle.g.edge_count(), bundle.h.edge_count()],
        "claims": bundle.metadata.claims,
        "seeds": bundle.metadata.seeds,
    }))
}

fn gen(family: &GenFamily) -> std::result::Result<Outcome, Failure> {
    match family {
        GenFamily::Lemma36 { n, out } => {
            let q = gen_lemma36_qap(*n)?;
            let path = out.clone().unwrap_or_else(|| format!("lemma36_n{n}.qap"));
            std::fs::write(&path, serialize_qap(&q)).map_err(Error::from)?;
            ok(json!({
                "family": "lemma36",
                "n": n,
                "k": n.ilog2(),
                "out": path,
                "nonzero": q.nonzero_entries().len(),
            }))
        }
        GenFamily::Cfi { base, base_file, out } => {
            let (graph, name) = match (base, base_file) {
                (Some(name), _) => (stock_base(name)?, name.clone()),
                (None, Some(path)) => (read_graph(path)?, "custom".to_string()),
                (None, None) => unreachable!("clap requires a base"),
            };
            let bundle = gen_cfi_pair(&graph)?;
            save_bundle(&bundle, out.as_deref().unwrap_or(&format!("cfi_{name}")))
        }
        GenFamily::Blowup { input, ell, out } => {
            let base = InstanceBundle::load(input)?;
            let bundle = gen_blowup_pair(&base, *ell)?;
            let default = format!("{}_blowup{ell}", input.trim_end_matches('/'));
            save_bundle(&bundle, out.as_deref().unwrap_or(&default))
        }
        GenFamily::Random {
            n,
            p,
            seed,
            target_vc,
            retries,
            out,
        } => {
            let seeds = [*seed, seed.wrapping_add(1)];
            let draw = |s: u64| match target_vc {
                Some(d) => gen_random_graph_with_vc(*n, *p, *d, s, *retries),
                None => gen_random_graph(*n, *p, s),
            };
            let mut bundle = bundle_from_pair(draw(seeds[0])?, draw(seeds[1])?, "random")?;
            bundle.metadata.params.insert("n".into(), json!(n));
            bundle.metadata.params.insert("p".into(), json!(p));
            if let Some(d) = target_vc {
                bundle.metadata.params.insert("target_vc".into(), json!(d));
            }
            bundle.metadata.seeds = seeds.to_vec();
            save_bundle(&bundle, out.as_deref().unwrap_or(&format!("random_n{n}_s{seed}")))
        }
    }
}

fn oracle(a: &OracleArgs) -> std::result::Result<Outcome, Failure> {
    if let Some(path) = &a.qap {
        let q = read_qap(path)?;
        let (cost, phi) = qap_bruteforce_capped(&q, a.cap.unwrap_or(DEFAULT_QAP_CAP))?;
        return ok(json!({ "cost": format_rational(&cost), "assignment": phi }));
    }
    let g = read_graph(a.g.as_deref().expect("clap enforces --g or --qap"))?;
    let h = read_graph(a.h.as_deref().expect("clap requires --h with --g"))?;
    let (cost, phi) = edit_distance_bruteforce_capped(&g, &h, a.cap.unwrap_or(DEFAULT_BRUTEFORCE_CAP))?;
    ok(json!({ "cost": format_rational(&cost), "bijection": phi }))
}

fn bench(a: &BenchArgs, budget: Option<u128>) -> std::result::Result<Outcome, Failure> {
    let s = &a.solver;
    let opts = approx_options(s, budget, false);
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut worst: Option<Rational> = None;
    for i in 0..a.pairs as u64 {
        let pair_seed = s.seed.wrapping_add(2 * i);
        let g = gen_random_graph(a.n, a.p, pair_seed)?;
        let h = gen_random_graph(a.n, a.p, pair_seed.wrapping_add(1))?;
        let approx = approximate_ged(&g, &h, &s.eps, s.m, pair_seed, mode(s), &opts)?;
        let mut row = json!({ "seed": pair_seed, "approx_cost": format_rational(&approx.cost) });
        if a.n <= s.oracle_cap.min(DEFAULT_BRUTEFORCE_CAP) {
            let (exact, _) = edit_distance_bruteforce_capped(&g, &h, DEFAULT_BRUTEFORCE_CAP)?;
            let gap = &approx.cost - &exact;
            row["oracle_cost"] = json!(format_rational(&exact));
            row["gap"] = json!(format_rational(&gap));
            if worst.as_ref().is_none_or(|w| &gap > w) {
                worst = Some(gap);
            }
        }
        rows.push(row);
    }
    ok(json!({
        "n": a.n,
        "eps": format_rational(&s.eps),
        "m": s.m,
        "seed": s.seed,
        "pairs": rows,
        "max_gap": worst.map(|w| format_rational(&w)),
        "timing_ms": millis(start),
    }))
}
