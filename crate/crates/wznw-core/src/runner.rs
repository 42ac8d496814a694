//! Task execution: dispatches validated tasks, writes one artifact file per
//! task plus a plain-text summary, and reports overall pass/fail.
//!
//! Outputs are deterministic: JSON objects have sorted keys, every complex
//! number is serialized as a `(re, im)` pair of decimal strings at full
//! working precision, rationals are serialized exactly, and re-running the
//! same configuration reproduces every artifact byte for byte.  Under
//! `parallel`, tasks run on scoped threads that share nothing mutable and
//! the results are merged in file order, so the artifacts and the summary
//! do not depend on scheduling.

use std::fs;
use std::path::PathBuf;

use astro_float::BigFloat;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::affinevoa::{
    build_truncated_module, check_l_minus1, irreducible_quotient, normal_order_identity_holds,
    virasoro_bracket_holds, virasoro_modes, Letter, TruncatedModule, VertexOps,
};
use crate::bigcx::{Ctx, Cx, CxMat};
use crate::config::{
    AssocTask, BlocksTask, ConnectTask, FuseTask, MonodromyTask, NPointTask, RunConfig, Task,
    VoaCheckTask,
};
use crate::continuation::{
    connection_matrix, monodromy_suite, verify_associativity, verify_n_point,
};
use crate::kz::{
    assemble_n_point, frobenius_system, fusion_sl2_closed, fusion_sl2_spectral,
    reduce_four_point, SingularPoint,
};
use crate::liealg::LieAlgebra;
use crate::rat::{qi, qr, Q};
use crate::Result;

/// What a run produced: the overall verdict, the rendered summary text, and
/// the artifact files that were written.
pub struct RunOutcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct TaskResult {
    name: &'static str,
    pass: bool,
    lines: Vec<String>,
    file_name: String,
    contents: String,
}

/// Executes every task of the configuration, writes the artifacts, and
/// returns the outcome.  An empty task list succeeds without writing
/// anything.  A task that fails its verification or hits a hard error makes
/// the outcome failing but never stops the other tasks.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    if config.tasks.is_empty() {
        return Ok(RunOutcome {
            passed: true,
            summary: render_summary(&[]),
            files: Vec::new(),
        });
    }
    let results: Vec<TaskResult> = if config.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = config
                .tasks
                .iter()
                .enumerate()
                .map(|(i, t)| s.spawn(move || execute(i, t)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("task thread panicked"))
                .collect()
        })
    } else {
        config.tasks.iter().enumerate().map(|(i, t)| execute(i, t)).collect()
    };
    fs::create_dir_all(&config.out_dir)?;
    let mut files = Vec::new();
    for r in &results {
        let path = config.out_dir.join(&r.file_name);
        fs::write(&path, &r.contents)?;
        files.push(path);
    }
    let summary = render_summary(&results);
    let summary_path = config.out_dir.join("summary.txt");
    fs::write(&summary_path, &summary)?;
    files.push(summary_path);
    Ok(RunOutcome {
        passed: results.iter().all(|r| r.pass),
        summary,
        files,
    })
}

fn render_summary(results: &[TaskResult]) -> String {
    let mut out = String::from("run summary\n===========\n\n");
    if results.is_empty() {
        out.push_str("no tasks configured\n\nresult: PASS (0/0 tasks passed)\n");
        return out;
    }
    for (i, r) in results.iter().enumerate() {
        out.push_str(&format!("{}. {}: {}\n", i + 1, r.name, pass_str(r.pass)));
        for line in &r.lines {
            out.push_str("   ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    out.push_str(&format!(
        "\nresult: {} ({}/{} tasks passed)\n",
        pass_str(passed == results.len()),
        passed,
        results.len()
    ));
    out
}

fn execute(index: usize, task: &Task) -> TaskResult {
    let name = task.name();
    let ext = match task {
        Task::Blocks(_) | Task::VoaCheck(_) => "csv",
        _ => "json",
    };
    let file_name = format!("{:02}-{}.{}", index + 1, name, ext);
    let outcome = match task {
        Task::Fuse(t) => fuse_task(t),
        Task::Blocks(t) => blocks_task(t),
        Task::Connect(t) => connect_task(t),
        Task::Monodromy(t) => monodromy_task(t),
        Task::VerifyAssoc(t) => assoc_task(t),
        Task::VerifyNPoint(t) => npoint_task(t),
        Task::VoaCheck(t) => voa_check_task(t),
    };
    match outcome {
        Ok((pass, lines, contents)) => TaskResult {
            name,
            pass,
            lines,
            file_name,
            contents,
        },
        Err(e) => {
            let message = e.to_string();
            let contents = if ext == "csv" {
                format!("error\n\"{}\"\n", message.replace('"', "\"\""))
            } else {
                pretty(json!({ "task": name, "error": message, "pass": false }))
            };
            TaskResult {
                name,
                pass: false,
                lines: vec![format!("error: {}", message)],
                file_name,
                contents,
            }
        }
    }
}

type TaskOutput = Result<(bool, Vec<String>, String)>;

// ---------------------------------------------------------------------------
// Individual tasks.

fn fuse_task(t: &FuseTask) -> TaskOutput {
    let alg = LieAlgebra::sl(t.algebra)?;
    let (m1, m2) = (t.weights[0][0], t.weights[1][0]);
    let closed = fusion_sl2_closed(t.level, m1, m2)?;
    let spectral = fusion_sl2_spectral(&alg, t.level, m1, m2)?;
    let pass = closed.channels == spectral.channels;
    let spins: Vec<String> = closed.channels.iter().map(|m| fq(&qr(*m, 2))).collect();
    let contents = pretty(json!({
        "task": "fuse",
        "algebra": alg_label(t.algebra),
        "level": t.level,
        "inputs": [m1, m2],
        "channels": closed.channels,
        "spins": spins,
        "closed_form_matches_spectral": pass,
        "pass": pass,
    }));
    let line = format!(
        "fusion rule: {}, spins = {{{}}}",
        pass_str(pass),
        spins.join(", ")
    );
    Ok((pass, vec![line], contents))
}

fn blocks_task(t: &BlocksTask) -> TaskOutput {
    let alg = LieAlgebra::sl(t.algebra)?;
    let fp = reduce_four_point(&alg, t.level, &t.weights)?;
    let sols = frobenius_system(&fp, t.point, t.order)?;
    let dim = fp.dim();
    let pass = sols.len() == dim;
    let mut csv = String::from("family,exponent,order");
    for i in 0..dim {
        csv.push_str(&format!(",c{}", i));
    }
    csv.push('\n');
    for (f, sol) in sols.iter().enumerate() {
        for (m, row) in sol.coeffs.iter().enumerate() {
            csv.push_str(&format!("{},{},{}", f, sol.exponent, m));
            for c in row {
                csv.push_str(&format!(",{}", c));
            }
            csv.push('\n');
        }
    }
    let exps: Vec<String> = sols.iter().map(|s| s.exponent.to_string()).collect();
    let line = format!(
        "local basis at {}: {}, {} of {} solutions, exponents {{{}}}",
        point_label(t.point),
        pass_str(pass),
        sols.len(),
        dim,
        exps.join(", ")
    );
    Ok((pass, vec![line], csv))
}

fn connect_task(t: &ConnectTask) -> TaskOutput {
    let ctx = Ctx::new(t.precision);
    let alg = LieAlgebra::sl(t.algebra)?;
    let fp = reduce_four_point(&alg, t.level, &t.weights)?;
    let conn = connection_matrix(&ctx, &fp, t.order, &t.samples, &t.tolerance)?;
    let tol = ctx.from_q(&t.tolerance);
    let mut max_res = ctx.zero();
    for (_, r) in &conn.samples {
        if ctx.lt(&max_res, r) {
            max_res = r.clone();
        }
    }
    let pass = !ctx.lt(&tol, &max_res);
    let samples_json: Vec<Value> = conn
        .samples
        .iter()
        .map(|(p, r)| json!({ "point": fq(p), "residual": ctx.format_real(r) }))
        .collect();
    let contents = pretty(json!({
        "task": "connect",
        "algebra": alg_label(t.algebra),
        "level": t.level,
        "weights": t.weights.to_vec(),
        "anchor": fq(&conn.anchor),
        "order": conn.order,
        "digits": conn.digits,
        "exponents_at_0": qvec(&conn.exponents0),
        "exponents_at_1": qvec(&conn.exponents1),
        "physical_at_0": conn.physical0,
        "physical_at_1": conn.physical1,
        "matrix": mat_json(&ctx, &conn.matrix),
        "determinant": cx_json(&ctx, &conn.determinant),
        "condition": ctx.format_real(&conn.condition),
        "samples": samples_json,
        "tolerance": fq(&t.tolerance),
        "pass": pass,
    }));
    let pts: Vec<String> = t.samples.iter().map(fq).collect();
    let line = format!(
        "connection overlap at {{{}}}: {}, max residual {}",
        pts.join(", "),
        pass_str(pass),
        short(&ctx, &max_res)
    );
    Ok((pass, vec![line], contents))
}

fn monodromy_task(t: &MonodromyTask) -> TaskOutput {
    let ctx = Ctx::new(t.precision);
    let alg = LieAlgebra::sl(t.algebra)?;
    let fp = reduce_four_point(&alg, t.level, &t.weights)?;
    let suite = monodromy_suite(&ctx, &fp, t.order)?;
    let tol = ctx.from_q(&t.tolerance);
    let triple_tol = ctx.from_q(&t.triple_tolerance);
    let checks: [(&str, &BigFloat, &BigFloat); 6] = [
        ("contractible loop", &suite.contractible_residual, &tol),
        ("reverse path", &suite.reverse_residual, &tol),
        ("eigenphases at 0", &suite.eigenphase0_residual, &tol),
        ("eigenphases at 1", &suite.eigenphase1_residual, &tol),
        ("triple product", &suite.triple_residual, &triple_tol),
        ("braiding squared", &suite.braid_residual, &tol),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (label, residual, bound) in checks {
        let ok = !ctx.lt(bound, residual);
        pass &= ok;
        lines.push(format!(
            "{}: {}, residual {}",
            label,
            pass_str(ok),
            short(&ctx, residual)
        ));
    }
    let contents = pretty(json!({
        "task": "monodromy",
        "algebra": alg_label(t.algebra),
        "level": t.level,
        "weights": t.weights.to_vec(),
        "base_point": fq(&suite.base),
        "order": suite.order,
        "exponents_at_0": qvec(&suite.exponents0),
        "exponents_at_1": qvec(&suite.exponents1),
        "loop_around_0": mat_json(&ctx, &suite.m0),
        "loop_around_1": mat_json(&ctx, &suite.m1),
        "loop_around_infinity": mat_json(&ctx, &suite.m_inf),
        "residuals": {
            "contractible": ctx.format_real(&suite.contractible_residual),
            "reverse": ctx.format_real(&suite.reverse_residual),
            "eigenphases_at_0": ctx.format_real(&suite.eigenphase0_residual),
            "eigenphases_at_1": ctx.format_real(&suite.eigenphase1_residual),
            "triple_product": ctx.format_real(&suite.triple_residual),
            "braiding_squared": ctx.format_real(&suite.braid_residual),
        },
        "tolerance": fq(&t.tolerance),
        "triple_tolerance": fq(&t.triple_tolerance),
        "pass": pass,
    }));
    Ok((pass, lines, contents))
}

fn assoc_task(t: &AssocTask) -> TaskOutput {
    let ctx = Ctx::new(t.precision);
    let alg = LieAlgebra::sl(t.algebra)?;
    let fp = reduce_four_point(&alg, t.level, &t.weights)?;
    let chk = verify_associativity(&ctx, &fp, &t.z1, &t.z2, t.order, &t.tolerance)?;
    let tol = ctx.from_q(&t.tolerance);
    let pass = !ctx.lt(&tol, &chk.max_residual);
    let contents = pretty(json!({
        "task": "verify-assoc",
        "algebra": alg_label(t.algebra),
        "level": t.level,
        "weights": t.weights.to_vec(),
        "z1": fq(&chk.z1),
        "z2": fq(&chk.z2),
        "ratio": fq(&chk.ratio),
        "column_residuals": chk
            .column_residuals
            .iter()
            .map(|r| Value::String(ctx.format_real(r)))
            .collect::<Vec<_>>(),
        "max_residual": ctx.format_real(&chk.max_residual),
        "connection_condition": ctx.format_real(&chk.connection_condition),
        "order": t.order,
        "tolerance": fq(&t.tolerance),
        "pass": pass,
    }));
    let line = format!(
        "iterate vs product agreement at ({}, {}): {}, max residual {}",
        fq(&t.z1),
        fq(&t.z2),
        pass_str(pass),
        short(&ctx, &chk.max_residual)
    );
    Ok((pass, vec![line], contents))
}

fn npoint_task(t: &NPointTask) -> TaskOutput {
    let alg = LieAlgebra::sl(t.algebra)?;
    let np = assemble_n_point(&alg, t.level, &t.weights)?;
    let rep = verify_n_point(&np, &t.points, t.order, t.window)?;
    let ratio_ok = match &rep.max_tail_ratio {
        Some(r) => r < &t.ratio_bound,
        None => true,
    };
    let drift_ok = rep.max_drift <= t.drift_tolerance;
    let pass = rep.converged && ratio_ok && drift_ok;
    let families: Vec<Value> = rep
        .families
        .iter()
        .map(|f| {
            json!({
                "exponents": qvec(&f.rho),
                "tail_ratio": f.tail_ratio.as_ref().map(fq),
                "value": qvec(&f.value),
                "drift": fq(&f.drift),
            })
        })
        .collect();
    let contents = pretty(json!({
        "task": "verify-npoint",
        "algebra": alg_label(t.algebra),
        "level": t.level,
        "weights": t.weights,
        "points": qvec(&rep.points),
        "ratios": qvec(&rep.ratios),
        "order": rep.order,
        "refined_order": rep.refined_order,
        "window": rep.window,
        "families": families,
        "max_tail_ratio": rep.max_tail_ratio.as_ref().map(fq),
        "max_drift": fq(&rep.max_drift),
        "converged": rep.converged,
        "ratio_bound": fq(&t.ratio_bound),
        "drift_tolerance": fq(&t.drift_tolerance),
        "pass": pass,
    }));
    let pts: Vec<String> = t.points.iter().map(fq).collect();
    let ratio_text = match &rep.max_tail_ratio {
        Some(r) => q_short(r),
        None => "none (series truncates)".into(),
    };
    let lines = vec![
        format!(
            "product convergence at ({}): {}",
            pts.join(", "),
            pass_str(pass)
        ),
        format!(
            "geometric tails: {}, worst ratio {}",
            pass_str(rep.converged && ratio_ok),
            ratio_text
        ),
        format!(
            "value stability under doubled order: {}, drift {}",
            pass_str(drift_ok),
            q_short(&rep.max_drift)
        ),
    ];
    Ok((pass, lines, contents))
}

fn voa_check_task(t: &VoaCheckTask) -> TaskOutput {
    let alg = LieAlgebra::sl(t.algebra)?;
    let zero = vec![0i64; t.algebra - 1];
    let tm = build_truncated_module(&alg, &qi(t.level), &zero, t.depth)?;
    let irr = irreducible_quotient(&alg, &tm)?;
    let vm = virasoro_modes(&alg, &tm)?;

    let c = vm.central_charge().clone();
    let c_formula =
        qi(t.level) * qi(alg.dim() as i64) / (qi(t.level) + qi(alg.root_system().dual_coxeter()));
    let mut brackets_ok = c == c_formula;
    for m in -2i64..=2 {
        for n in -2i64..=2 {
            for d in 0..=t.depth {
                brackets_ok &= virasoro_bracket_holds(&vm, m, n, d);
            }
        }
    }
    let mut lines = vec![format!(
        "Virasoro relations: {}, c = {}",
        pass_str(brackets_ok),
        c
    )];

    let vo = VertexOps::new(&tm);
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let mut identities_ok = true;
    for _ in 0..t.states {
        let (word, letter, n, d, v) = random_identity_instance(&mut rng, &alg, &tm);
        identities_ok &= normal_order_identity_holds(&tm, &vo, &word, letter, n, d, &v)?;
    }
    let vm_irr = virasoro_modes(&alg, &irr)?;
    for (module, modes) in [(&tm, &vm), (&irr, &vm_irr)] {
        for col in 0..module.dims()[0] {
            let mut w = vec![Q::zero(); module.dims()[0]];
            w[col] = Q::one();
            identities_ok &= check_l_minus1(&alg, module, modes, &w)?;
        }
    }
    lines.push(format!(
        "vertex identities: {} ({} randomized states)",
        pass_str(identities_ok),
        t.states
    ));
    lines.push(format!(
        "graded dimensions: induced {:?}, irreducible {:?}",
        tm.dims(),
        irr.dims()
    ));

    let mut csv = String::from("module,depth,dimension\n");
    for (label, module) in [("induced", &tm), ("irreducible", &irr)] {
        for (d, dim) in module.dims().iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", label, d, dim));
        }
    }
    let pass = brackets_ok && identities_ok;
    Ok((pass, lines, csv))
}

/// Draws a random admissible instance for the normal-ordering identity:
/// a short word, a letter, a mode index, and a depth whose target window
/// stays inside the truncation, plus a nonzero rational state.
fn random_identity_instance(
    rng: &mut ChaCha8Rng,
    alg: &LieAlgebra,
    tm: &TruncatedModule,
) -> (Vec<Letter>, Letter, i64, usize, Vec<Q>) {
    let depth = tm.depth();
    loop {
        let k = rng.gen_range(1..=2u32);
        let len = rng.gen_range(1..=2usize);
        let word: Vec<Letter> = (0..len)
            .map(|_| (rng.gen_range(0..alg.dim()), rng.gen_range(1..=2u32)))
            .collect();
        let a = rng.gen_range(0..alg.dim());
        let wt = k as i64 + VertexOps::weight(&word);
        if wt > depth as i64 {
            continue;
        }
        let d = rng.gen_range(0..=depth);
        let nmin = d as i64 + wt - 1 - depth as i64;
        let nmax = d as i64 + wt - 1;
        let n = rng.gen_range(nmin..=nmax);
        let v: Vec<Q> = (0..tm.dims()[d])
            .map(|_| qi(rng.gen_range(-3..=3)))
            .collect();
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        return (word, (a, k), n, d, v);
    }
}

// ---------------------------------------------------------------------------
// Formatting helpers.

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn alg_label(n: usize) -> String {
    format!("sl{}", n)
}

fn point_label(p: SingularPoint) -> &'static str {
    match p {
        SingularPoint::Zero => "z = 0",
        SingularPoint::One => "z = 1",
    }
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json serialization");
    s.push('\n');
    s
}

fn fq(q: &Q) -> String {
    q.to_string()
}

fn qvec(qs: &[Q]) -> Vec<String> {
    qs.iter().map(fq).collect()
}

/// Compact decimal rendering of an exact rational for summary lines; the
/// exact value lives in the JSON artifact.
fn q_short(q: &Q) -> String {
    match q.to_f64() {
        Some(f) if f.is_finite() => {
            if f == 0.0 {
                "0".into()
            } else {
                format!("{:.3e}", f)
            }
        }
        _ => q.to_string(),
    }
}

fn short(ctx: &Ctx, x: &BigFloat) -> String {
    ctx.format_real_digits(x, 3)
}

fn cx_json(ctx: &Ctx, z: &Cx) -> Value {
    json!([ctx.format_real(&z.re), ctx.format_real(&z.im)])
}

fn mat_json(ctx: &Ctx, m: &CxMat) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.cols()).map(|j| cx_json(ctx, m.at(i, j))).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_str, Overrides};

    fn run_text(text: &str, dir: &std::path::Path) -> RunOutcome {
        let over = Overrides {
            out: Some(dir.to_path_buf()),
            ..Default::default()
        };
        let rc = parse_str(text, &over).unwrap();
        run(&rc).unwrap()
    }

    #[test]
    fn empty_task_list_writes_nothing_and_passes() {
        let dir = std::env::temp_dir().join("wznw-runner-empty");
        let _ = fs::remove_dir_all(&dir);
        let outcome = run_text("", &dir);
        assert!(outcome.passed);
        assert!(outcome.files.is_empty());
        assert!(!dir.exists(), "no output directory for an empty run");
        assert!(outcome.summary.contains("no tasks configured"));
    }

    #[test]
    fn fuse_task_reports_the_spin_set() {
        let dir = std::env::temp_dir().join("wznw-runner-fuse");
        let _ = fs::remove_dir_all(&dir);
        let outcome = run_text(
            "algebra = sl2\nlevel = 2\n[fuse]\nweights = 1; 1\n",
            &dir,
        );
        assert!(outcome.passed);
        assert!(
            outcome.summary.contains("fusion rule: PASS, spins = {0, 1}"),
            "summary:\n{}",
            outcome.summary
        );
        let json_text = fs::read_to_string(dir.join("01-fuse.json")).unwrap();
        let v: Value = serde_json::from_str(&json_text).unwrap();
        assert_eq!(v["channels"], json!([0, 2]));
        assert_eq!(v["spins"], json!(["0", "1"]));
        assert_eq!(v["pass"], json!(true));
        assert!(dir.join("summary.txt").exists());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn voa_check_prints_the_central_charge() {
        let dir = std::env::temp_dir().join("wznw-runner-voa");
        let _ = fs::remove_dir_all(&dir);
        let outcome = run_text(
            "algebra = sl2\nlevel = 1\n[voa-check]\ndepth = 4\nstates = 6\n",
            &dir,
        );
        assert!(outcome.passed, "summary:\n{}", outcome.summary);
        assert!(
            outcome.summary.contains("Virasoro relations: PASS, c = 1"),
            "summary:\n{}",
            outcome.summary
        );
        assert!(outcome
            .summary
            .contains("vertex identities: PASS (6 randomized states)"));
        let csv = fs::read_to_string(dir.join("01-voa-check.csv")).unwrap();
        assert!(csv.starts_with("module,depth,dimension\n"));
        assert!(csv.contains("irreducible,4,13\n"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn blocks_task_emits_exact_series_rows() {
        let dir = std::env::temp_dir().join("wznw-runner-blocks");
        let _ = fs::remove_dir_all(&dir);
        let outcome = run_text(
            "algebra = sl2\nlevel = 1\n[blocks]\nweights = 1; 1; 1; 1\norder = 3\n",
            &dir,
        );
        assert!(outcome.passed, "summary:\n{}", outcome.summary);
        let csv = fs::read_to_string(dir.join("01-blocks.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("family,exponent,order,c0,c1"));
        assert!(csv.contains("-1/2"), "exponent column:\n{}", csv);
        assert!(outcome.summary.contains("local basis at z = 0: PASS"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn failing_region_check_is_a_task_error_not_a_crash() {
        let dir = std::env::temp_dir().join("wznw-runner-err");
        let _ = fs::remove_dir_all(&dir);
        let text = "algebra = sl2\nlevel = 1\n\
                    [verify-npoint]\nweights = 1; 1; 1; 1; 0\npoints = 1 1/2 1/5\norder = 6\n\
                    [fuse]\nweights = 1; 1\n";
        let outcome = run_text(text, &dir);
        // order 6 is too small for a conclusive tail: the npoint task fails,
        // the fuse task still runs and passes.
        assert!(!outcome.passed);
        assert!(outcome.summary.contains("2. fuse: PASS"));
        assert!(outcome.summary.contains("result: FAIL (1/2 tasks passed)"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn parallel_and_sequential_runs_are_byte_identical() {
        let text = "algebra = sl2\nlevel = 2\n\
                    [fuse]\nweights = 1; 1\n\
                    [voa-check]\nlevel = 1\ndepth = 3\nstates = 4\n\
                    [blocks]\nweights = 1; 1; 1; 1\norder = 4\n";
        let dir_a = std::env::temp_dir().join("wznw-runner-seq");
        let dir_b = std::env::temp_dir().join("wznw-runner-par");
        let _ = fs::remove_dir_all(&dir_a);
        let _ = fs::remove_dir_all(&dir_b);
        let rc_a = parse_str(
            text,
            &Overrides {
                out: Some(dir_a.clone()),
                ..Default::default()
            },
        )
        .unwrap();
        let rc_b = parse_str(
            text,
            &Overrides {
                out: Some(dir_b.clone()),
                parallel: true,
                ..Default::default()
            },
        )
        .unwrap();
        let out_a = run(&rc_a).unwrap();
        let out_b = run(&rc_b).unwrap();
        assert!(out_a.passed && out_b.passed);
        assert_eq!(out_a.summary, out_b.summary);
        for (pa, pb) in out_a.files.iter().zip(&out_b.files) {
            assert_eq!(
                fs::read(pa).unwrap(),
                fs::read(pb).unwrap(),
                "artifact mismatch: {:?} vs {:?}",
                pa,
                pb
            );
        }
        fs::remove_dir_all(&dir_a).unwrap();
        fs::remove_dir_all(&dir_b).unwrap();
    }
}
