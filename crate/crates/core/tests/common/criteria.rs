//! One check per acceptance criterion. Each returns `Ok(detail)` when the
//! criterion holds and `Err(detail)` otherwise, so the acceptance target and
//! the topical integration tests share a single implementation.

use std::path::Path;

use ised::blackbox::{builtin, Program, ProgramErrorKind};
use ised::bench::{synth_dataset, TaskSpec};
use ised::estimator::{
    exact_wmc, exhaustive_summary, indecater_grad, ised_forward, ised_grad, nasr_grad, reinforce_grad,
    SampleSummary,
};
use ised::experiment::{execute, golden, sum2_small, EstimatorName, ExperimentConfig};
use ised::mapping::{cardinality, enumerate_set, DistValue, Semiring, SetValue};
use ised::neural::{backprop_perception, perceive, Mlp};
use ised::sampler::RandomnessKey;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::{digits, random_dist, random_dist_for, random_formula, rel_err, rng, shunting_yard, Oracle};

pub type Check = Result<String, String>;

fn close(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
}

// ---------------------------------------------------------------- criterion 1

pub fn golden_reproduction() -> Check {
    let j = (0.6f64.ln() + 0.7f64.ln() + 0.3f64.ln() + 0.1f64.ln()) / 3.0;
    let cases: [(&str, Vec<f64>); 5] = [
        ("ised-addmult", vec![0.0, 0.12, 0.0, 0.45, 0.0]),
        ("ised-minmax", vec![0.0, 0.2, 0.0, 0.6, 0.0]),
        ("dpl", vec![0.02, 0.13, 0.19, 0.45, 0.21]),
        ("scallop", vec![0.02, 0.12, 0.07, 0.42, 0.21]),
        ("reinforce", vec![j]),
    ];
    for (case, want) in cases {
        let got = golden(case).map_err(|e| format!("{case}: {e}"))?;
        if !close(&got, &want, 1e-9) {
            return Err(format!("{case}: {got:?} vs {want:?}"));
        }
    }
    Ok("5 cases within 1e-9".into())
}

// ---------------------------------------------------------------- criterion 2

/// Builtins whose input space is at most 10⁴ and whose output is finite.
pub fn small_builtins() -> Vec<Program> {
    ised::blackbox::builtin_names()
        .iter()
        .filter_map(|n| builtin(n).ok())
        .filter(|p| {
            cardinality(&p.input_tuple_mapping()).finite().is_some_and(|c| c <= 10_000)
                && cardinality(p.output_mapping()).finite().is_some()
        })
        .collect()
}

/// Exhaustive-summary ISED under add-mult against exact WMC. Returns the
/// largest absolute deviation.
pub fn wmc_equivalence(instances: usize) -> Check {
    let required = ["sum2", "mult2", "mod2", "less-than", "equal", "add-mod-3"];
    let programs = small_builtins();
    for name in required {
        if !programs.iter().any(|p| p.name() == name) {
            return Err(format!("{name} missing from the enumerable builtins"));
        }
    }
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for program in &programs {
        for _ in 0..instances {
            let p_hat: Vec<DistValue> = program.input_mappings().iter().map(|m| random_dist_for(m, &mut r)).collect();
            let exact = exact_wmc(program, &p_hat).map_err(|e| e.to_string())?;
            let summary = exhaustive_summary(program, p_hat, 10_000).map_err(|e| e.to_string())?;
            // any output works as ground truth; w_tilde does not depend on it
            let y = summary.y_hat.iter().flatten().next().cloned().ok_or("no successful tuple")?;
            let w = ised_forward(&summary, program.output_mapping(), Semiring::AddMult, &y)
                .map_err(|e| e.to_string())?
                .w_tilde;
            if w.len() != exact.len() {
                return Err(format!("{}: {} slots vs {}", program.name(), w.len(), exact.len()));
            }
            let dev = w.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(dev);
            if dev > 1e-12 {
                return Err(format!("{}: deviation {dev:e}", program.name()));
            }
        }
    }
    Ok(format!(
        "{} programs x {instances} instances, max deviation {worst:.1e}",
        programs.len()
    ))
}

// ---------------------------------------------------------------- criterion 3

/// True when a min-max gradient is ambiguous: two distinct probabilities
/// inside one proof, or two distinct proofs of the same output, are within
/// 1e-6 of each other. Discrete inputs only.
pub fn minmax_tie(summary: &SampleSummary) -> bool {
    let picks: Vec<Vec<f64>> = summary
        .r_hat
        .iter()
        .map(|tuple| {
            tuple
                .iter()
                .zip(&summary.p_hat)
                .map(|(v, p)| match (v, p) {
                    (SetValue::Discrete(c), DistValue::Discrete(row)) => row[*c],
                    _ => panic!("discrete inputs only"),
                })
                .collect()
        })
        .collect();
    let near = |a: f64, b: f64| a != b && (a - b).abs() < 1e-6;
    let mut weights = Vec::new();
    for (j, ps) in picks.iter().enumerate() {
        for a in 0..ps.len() {
            for b in a + 1..ps.len() {
                if near(ps[a], ps[b]) {
                    return true;
                }
            }
        }
        let w = ps.iter().cloned().fold(1.0, f64::min);
        if let Ok(y) = &summary.y_hat[j] {
            weights.push((y.clone(), &summary.r_hat[j], w));
        }
    }
    for a in 0..weights.len() {
        for b in a + 1..weights.len() {
            let (ya, ra, wa) = &weights[a];
            let (yb, rb, wb) = &weights[b];
            if ya == yb && ra != rb && (wa - wb).abs() < 1e-6 {
                return true;
            }
        }
    }
    false
}

fn random_instance(program: &Program, r: &mut ChaCha20Rng) -> (Vec<DistValue>, usize, SetValue) {
    let p_hat: Vec<DistValue> = program
        .input_mappings()
        .iter()
        .map(|m| random_dist(m.alphabet().map_or(0, |a| a.len()), r))
        .collect();
    let k = r.random_range(1..=30);
    let y = if r.random_bool(0.8) {
        // the output of a random tuple, so that some samples usually match
        loop {
            let tuple: Vec<SetValue> = program
                .input_mappings()
                .iter()
                .map(|m| SetValue::Discrete(r.random_range(0..m.alphabet().map_or(1, |a| a.len()))))
                .collect();
            if let Ok(y) = program.evaluate(&tuple) {
                break y;
            }
        }
    } else {
        let outs = enumerate_set(program.output_mapping()).expect("finite output");
        outs[r.random_range(0..outs.len())].clone()
    };
    (p_hat, k, y)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GradReport {
    pub checked: usize,
    pub skipped_ties: usize,
    pub max_rel_err: f64,
}

/// `ised_grad` against central differences (h = 1e-5) on `instances` random
/// summaries per semiring over small digit programs.
pub fn ised_grad_fidelity(s: Semiring, instances: usize, seed: u64) -> Result<GradReport, String> {
    let programs: Vec<Program> = ["sum2", "mult2", "less-than", "add-mod-3", "sum3"]
        .iter()
        .map(|n| builtin(n).unwrap())
        .collect();
    let mut r = rng(seed);
    let mut rep = GradReport::default();
    let h = 1e-5;
    while rep.checked < instances {
        let program = &programs[r.random_range(0..programs.len())];
        let (p_hat, k, y) = random_instance(program, &mut r);
        let key = RandomnessKey::example(seed, (rep.checked + rep.skipped_ties) as u64);
        let summary = SampleSummary::draw(program, p_hat, k, key).map_err(|e| e.to_string())?;
        if s == Semiring::MinMax && minmax_tie(&summary) {
            rep.skipped_ties += 1;
            continue;
        }
        let out = program.output_mapping();
        let res = ised_grad(&summary, out, s, &y).map_err(|e| e.to_string())?;
        let analytic: Vec<f64> = res
            .grad_p_hat
            .expect("gradient requested")
            .iter()
            .flat_map(|d| d.rows().concat())
            .collect();
        let loss = |p: Vec<DistValue>| {
            let t = SampleSummary { p_hat: p, ..summary.clone() };
            ised_forward(&t, out, s, &y).expect("forward").loss
        };
        let mut fd = Vec::with_capacity(analytic.len());
        for i in 0..summary.p_hat.len() {
            let n = summary.p_hat[i].rows()[0].len();
            for c in 0..n {
                let shifted = |delta: f64| {
                    let mut p = summary.p_hat.clone();
                    if let DistValue::Discrete(row) = &mut p[i] {
                        row[c] += delta;
                    }
                    p
                };
                fd.push((loss(shifted(h)) - loss(shifted(-h))) / (2.0 * h));
            }
        }
        let e = rel_err(&analytic, &fd, 1e-6);
        rep.max_rel_err = rep.max_rel_err.max(e);
        rep.checked += 1;
    }
    Ok(rep)
}

/// Which gradient the chain check differentiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainEstimator {
    Ised(Semiring),
    Reinforce,
}

/// Features → MLP → p̂ → estimator → backprop, against central differences
/// in θ with the drawn samples held fixed.
pub fn chain_fidelity(est: ChainEstimator, instances: usize, seed: u64) -> Result<GradReport, String> {
    let task = TaskSpec::builtin("sum2").map_err(|e| e.to_string())?;
    let ds = synth_dataset(&task, instances * 2, 0.3, seed).map_err(|e| e.to_string())?;
    let out = task.program.output_mapping();
    let mut rep = GradReport::default();
    let h = 1e-6;
    for (idx, ex) in ds.examples().iter().enumerate() {
        if rep.checked == instances {
            break;
        }
        let model = Mlp::new(task.feature_dim(), &[6], task.head_spec(), seed * 1000 + idx as u64)
            .map_err(|e| e.to_string())?;
        let p = perceive(&model, &task, &ex.features).map_err(|e| e.to_string())?;
        let summary = SampleSummary::draw(&task.program, p.p_hat.clone(), 10, RandomnessKey::example(seed, idx as u64))
            .map_err(|e| e.to_string())?;
        if est == ChainEstimator::Ised(Semiring::MinMax) && minmax_tie(&summary) {
            rep.skipped_ties += 1;
            continue;
        }
        let objective = |s: &SampleSummary| -> f64 {
            match est {
                ChainEstimator::Ised(sr) => ised_forward(s, out, sr, &ex.target).expect("forward").loss,
                ChainEstimator::Reinforce => -reinforce_grad(s, &ex.target, None).expect("reinforce").objective,
            }
        };
        let grad_p = match est {
            ChainEstimator::Ised(sr) => ised_grad(&summary, out, sr, &ex.target)
                .map_err(|e| e.to_string())?
                .grad_p_hat
                .expect("gradient requested"),
            ChainEstimator::Reinforce => reinforce_grad(&summary, &ex.target, None).map_err(|e| e.to_string())?.grad_p_hat,
        };
        let mut g = model.zeros_like();
        backprop_perception(&model, &p, &grad_p, &mut g).map_err(|e| e.to_string())?;
        let loss_at = |m: &Mlp| {
            let q = perceive(m, &task, &ex.features).expect("perceive");
            objective(&SampleSummary { p_hat: q.p_hat, ..summary.clone() })
        };
        let mut analytic = Vec::new();
        let mut fd = Vec::new();
        for t in 0..model.tensors().len() {
            for i in 0..model.tensors()[t].len() {
                let mut a = model.clone();
                a.tensors_mut()[t][i] += h;
                let mut b = model.clone();
                b.tensors_mut()[t][i] -= h;
                fd.push((loss_at(&a) - loss_at(&b)) / (2.0 * h));
                analytic.push(g.tensors()[t][i]);
            }
        }
        rep.max_rel_err = rep.max_rel_err.max(rel_err(&analytic, &fd, 1e-6));
        rep.checked += 1;
    }
    if rep.checked < instances {
        return Err(format!("only {} usable instances", rep.checked));
    }
    Ok(rep)
}

pub fn gradient_fidelity(instances: usize, tol: f64) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in [Semiring::AddMult, Semiring::MinMax] {
        let rep = ised_grad_fidelity(s, instances, 3)?;
        ok &= rep.max_rel_err <= tol;
        parts.push(format!("ised_grad {s}: max rel {:.1e} ({} ties skipped)", rep.max_rel_err, rep.skipped_ties));
    }
    for est in [
        ChainEstimator::Ised(Semiring::AddMult),
        ChainEstimator::Ised(Semiring::MinMax),
        ChainEstimator::Reinforce,
    ] {
        let rep = chain_fidelity(est, instances, 5)?;
        ok &= rep.max_rel_err <= tol;
        parts.push(format!("chain {est:?}: max rel {:.1e}", rep.max_rel_err));
    }
    let detail = format!("{instances} instances each; {}", parts.join("; "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- criterion 6

/// Exact `∂E[reward]/∂p̂` for sum2 over digits 0–2: the partial for input 1
/// at symbol c is Σ_{c'} p̂₂[c']·1{c+c'=y}, and symmetrically for input 2.
pub fn sum2_small_truth(p: &[Vec<f64>; 2], y: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..2 {
        let other = &p[1 - i];
        for c in 0..3 {
            out.push((0..3).filter(|&c2| c + c2 == y).map(|c2| other[c2]).sum());
        }
    }
    out
}

fn flat(g: &[DistValue]) -> Vec<f64> {
    g.iter().flat_map(|d| d.rows().concat()).collect()
}

/// Running per-component mean and variance.
#[derive(Debug, Clone)]
pub struct Moments {
    n: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments { n: 0, sum: vec![0.0; dim], sq: vec![0.0; dim] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for (i, v) in x.iter().enumerate() {
            self.sum[i] += v;
            self.sq[i] += v * v;
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.n as f64).collect()
    }

    /// Unbiased sample variance per component.
    pub fn var(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sq)
            .map(|(s, q)| ((q - s * s / n) / (n - 1.0)).max(0.0))
            .collect()
    }

    /// Largest |mean − truth| in standard errors. Components with zero
    /// observed variance must match exactly.
    pub fn max_z(&self, truth: &[f64]) -> f64 {
        let n = self.n as f64;
        self.mean()
            .iter()
            .zip(self.var())
            .zip(truth)
            .map(|((m, v), t)| {
                let se = (v / n).sqrt();
                if se == 0.0 {
                    if (m - t).abs() <= 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (m - t).abs() / se
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Two sum2 (digits 0–2) instances: the worked example and a skewed one.
pub fn sum2_small_instances() -> Vec<([Vec<f64>; 2], usize)> {
    vec![
        ([vec![0.1, 0.6, 0.3], vec![0.2, 0.1, 0.7]], 3),
        ([vec![0.5, 0.3, 0.2], vec![0.15, 0.45, 0.4]], 2),
    ]
}

fn as_dists(p: &[Vec<f64>; 2]) -> Vec<DistValue> {
    p.iter().cloned().map(DistValue::Discrete).collect()
}

/// REINFORCE (k = 3) and NASR means over `runs` keys, in standard errors
/// from the negated exact gradient.
pub fn score_unbiasedness(runs: usize) -> Result<(f64, f64), String> {
    let program = sum2_small();
    let (mut worst_r, mut worst_n) = (0.0f64, 0.0f64);
    for (inst, (p, y)) in sum2_small_instances().into_iter().enumerate() {
        let truth: Vec<f64> = sum2_small_truth(&p, y).into_iter().map(|t| -t).collect();
        let yv = SetValue::Discrete(y);
        let mut mr = Moments::new(6);
        let mut mn = Moments::new(6);
        for run in 0..runs {
            let key = RandomnessKey::example(100 + inst as u64, run as u64);
            let s = SampleSummary::draw(&program, as_dists(&p), 3, key).map_err(|e| e.to_string())?;
            mr.push(&flat(&reinforce_grad(&s, &yv, None).map_err(|e| e.to_string())?.grad_p_hat));
            let n = nasr_grad(as_dists(&p), &program, &yv, key, None).map_err(|e| e.to_string())?;
            mn.push(&flat(&n.grad_p_hat));
        }
        worst_r = worst_r.max(mr.max_z(&truth));
        worst_n = worst_n.max(mn.max_z(&truth));
    }
    Ok((worst_r, worst_n))
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceReport {
    pub indecater_k: usize,
    pub indecater_calls: f64,
    pub reinforce_k: usize,
    pub indecater_var: f64,
    pub reinforce_var: f64,
    /// Largest deviation of the IndeCateR mean from the exact gradient, in
    /// standard errors.
    pub indecater_z: f64,
}

/// IndeCateR at `k` base samples against REINFORCE given the same number of
/// program calls per estimate; variance is the trace over all six partials.
pub fn variance_dominance(runs: usize, k: usize) -> Result<Vec<VarianceReport>, String> {
    let program = sum2_small();
    let mut out = Vec::new();
    for (inst, (p, y)) in sum2_small_instances().into_iter().enumerate() {
        let truth: Vec<f64> = sum2_small_truth(&p, y).into_iter().map(|t| -t).collect();
        let yv = SetValue::Discrete(y);
        let mut mi = Moments::new(6);
        let mut calls = 0usize;
        for run in 0..runs {
            let key = RandomnessKey::example(400 + inst as u64, run as u64);
            let r = indecater_grad(&as_dists(&p), &program, &yv, k, key, None).map_err(|e| e.to_string())?;
            calls += r.program_calls;
            mi.push(&flat(&r.grad_p_hat));
        }
        let mean_calls = calls as f64 / runs as f64;
        let reinforce_k = mean_calls.ceil() as usize;
        let mut mr = Moments::new(6);
        for run in 0..runs {
            let key = RandomnessKey::example(300 + inst as u64, run as u64);
            let s = SampleSummary::draw(&program, as_dists(&p), reinforce_k, key).map_err(|e| e.to_string())?;
            mr.push(&flat(&reinforce_grad(&s, &yv, None).map_err(|e| e.to_string())?.grad_p_hat));
        }
        out.push(VarianceReport {
            indecater_k: k,
            indecater_calls: mean_calls,
            reinforce_k,
            indecater_var: mi.var().iter().sum(),
            reinforce_var: mr.var().iter().sum(),
            indecater_z: mi.max_z(&truth),
        });
    }
    Ok(out)
}

pub fn estimator_statistics() -> Check {
    let (zr, zn) = score_unbiasedness(100_000)?;
    let reps = variance_dominance(10_000, 4)?;
    let mut ok = zr <= 4.0 && zn <= 4.0;
    let mut parts = vec![format!("reinforce max z {zr:.2}, nasr max z {zn:.2} (limit 4)")];
    for r in &reps {
        ok &= r.indecater_var <= r.reinforce_var && r.indecater_z <= 3.0;
        parts.push(format!(
            "indecater k={} ({:.2} calls) var {:.4} z {:.2} vs reinforce k={} var {:.4}",
            r.indecater_k, r.indecater_calls, r.indecater_var, r.indecater_z, r.reinforce_k, r.reinforce_var
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- criterion 7

pub fn hwf_agreement(per_length: usize) -> Check {
    let mut r = rng(2024);
    let program = builtin("hwf").map_err(|e| e.to_string())?;
    let mut values = 0;
    let mut errors = 0;
    for len in [1, 3, 5, 7] {
        for _ in 0..per_length {
            let f = random_formula(len, &mut r);
            let got = program.evaluate(&[SetValue::List(digits(&f))]);
            match (shunting_yard(&f), got) {
                (Oracle::Value(v), Ok(SetValue::Float(x))) if (x - v).abs() <= 1e-9 * v.abs().max(1.0) => values += 1,
                (Oracle::DivideByZero, Err(e)) if e.kind == ProgramErrorKind::DivideByZero => errors += 1,
                (want, got) => return Err(format!("{f:?}: oracle {want:?}, program {got:?}")),
            }
        }
    }
    Ok(format!("{values} values and {errors} division errors agree"))
}

// ------------------------------------------------------- criteria 4, 5 and 8

/// The end-to-end configuration: sum3 on 5K/500 noisy one-hot digits.
pub fn sum3_config(estimator: EstimatorName, k: usize, seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        task: "sum3".into(),
        estimator,
        semiring: (estimator == EstimatorName::Ised).then_some(Semiring::AddMult),
        k,
        epochs: 10,
        lr: 1e-3,
        batch_size: 16,
        seeds,
        train_size: 5000,
        test_size: 500,
        output_dir: Default::default(),
        ..Default::default()
    }
}

/// Mean final test accuracy and the per-seed values.
pub fn mean_accuracy(cfg: &ExperimentConfig) -> Result<(f64, Vec<f64>, f64), String> {
    let s = execute(cfg).map_err(|e| e.to_string())?.summary;
    Ok((
        s.accuracy_mean,
        s.per_seed.iter().map(|p| p.final_accuracy).collect(),
        s.calls_per_example,
    ))
}

/// Monte-Carlo accuracy of the Bayes-optimal sum classifier for `n` uniform
/// digits seen through one-hot features plus N(0, σ²) noise. No model of the
/// features can beat it. The digit posterior is softmax(x / σ²); the sum
/// posterior is the convolution of the digit posteriors.
pub fn bayes_sum_accuracy(n: usize, sigma: f64, draws: usize, seed: u64) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let mut hits = 0.0;
    for _ in 0..draws {
        let mut sum_post = vec![1.0];
        let mut truth = 0;
        for _ in 0..n {
            let d = r.random_range(0..10);
            truth += d;
            let logits: Vec<f64> = (0..10)
                .map(|c| {
                    let e: f64 = StandardNormal.sample(&mut r);
                    (f64::from(c == d) + sigma * e) / (sigma * sigma)
                })
                .collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = w.iter().sum();
            let mut next = vec![0.0; sum_post.len() + 9];
            for (s, ps) in sum_post.iter().enumerate() {
                for (c, wc) in w.iter().enumerate() {
                    next[s + c] += ps * wc / z;
                }
            }
            sum_post = next;
        }
        let mut best = 0;
        for (s, p) in sum_post.iter().enumerate() {
            if *p > sum_post[best] {
                best = s;
            }
        }
        hits += f64::from(best == truth);
    }
    hits / draws as f64
}

pub fn determinism(dir: &Path) -> Check {
    let cfg = ExperimentConfig {
        task: "sum2".into(),
        k: 8,
        epochs: 2,
        seeds: vec![0, 1],
        hidden: vec![16],
        train_size: 200,
        test_size: 50,
        output_dir: dir.to_path_buf(),
        ..Default::default()
    };
    let mut files = Vec::new();
    for attempt in 0..2 {
        let out = dir.join(format!("attempt{attempt}"));
        ised::experiment::run(&ExperimentConfig { output_dir: out.clone(), ..cfg.clone() })
            .map_err(|e| e.to_string())?;
        files.push(std::fs::read(out.join("metrics.ndjson")).map_err(|e| e.to_string())?);
    }
    let (a, b) = (execute(&cfg).map_err(|e| e.to_string())?, execute(&cfg).map_err(|e| e.to_string())?);
    if files[0] != files[1] {
        return Err("metrics.ndjson differs between identical runs".into());
    }
    if a.records != b.records {
        return Err("in-memory records differ between identical runs".into());
    }
    Ok(format!("{} metric lines byte-identical across repeats", a.records.len()))
}
