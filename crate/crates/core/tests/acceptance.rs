//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::process::ExitCode;
use std::time::Duration;

use randhankel::harness::{run, ExperimentConfig, ExperimentKind, ExperimentReport, StatRecord};

struct Verdict {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig::default_for(kind)
}

fn run_ok(cfg: &ExperimentConfig) -> ExperimentReport {
    run(cfg).unwrap_or_else(|e| panic!("{} failed to run: {e}", cfg.kind.name()))
}

fn selected(report: &ExperimentReport, keep: impl Fn(&StatRecord) -> bool) -> Vec<&StatRecord> {
    report.records.iter().filter(|r| keep(r)).collect()
}

fn describe(records: &[&StatRecord]) -> String {
    records
        .iter()
        .map(|r| {
            let mut s = format!("{}={:.6e}", r.name, r.empirical);
            if let Some(reference) = r.reference {
                s += &format!(" vs {reference:.6e}");
            }
            if let Some(p) = r.pvalue {
                s += &format!(" (p={p:.4})");
            }
            if !r.pass {
                s += " [fail]";
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn verdict(id: usize, title: &'static str, records: &[&StatRecord], budget: Option<(Duration, Duration)>) -> Verdict {
    let mut pass = !records.is_empty() && records.iter().all(|r| r.pass);
    let mut detail = describe(records);
    if let Some((took, limit)) = budget {
        pass &= took < limit;
        detail += &format!("; runtime {:.2}s (limit {}s)", took.as_secs_f64(), limit.as_secs());
    }
    Verdict { id, title, pass, detail }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() -> ExitCode {
    let mut verdicts = Vec::new();
    let mut seeded: Vec<(ExperimentConfig, String)> = Vec::new();

    let cfg = config(ExperimentKind::ProductFormula);
    let pf = run_ok(&cfg);
    verdicts.push(verdict(1, "product formula", &selected(&pf, |_| true), Some((pf.wall_time, secs(10)))));
    seeded.push((cfg, pf.to_jsonl()));

    let cfg = config(ExperimentKind::Decomposition);
    let dec = run_ok(&cfg);
    let two_path = selected(&dec, |r| r.name.starts_with("ks_two_path") || r.name.starts_with("mean_logdet"));
    verdicts.push(verdict(2, "two-path equality", &two_path, Some((dec.wall_time, secs(60)))));
    verdicts.push(verdict(3, "Bartlett diagonals", &selected(&dec, |r| r.name.starts_with("bartlett")), None));
    seeded.push((cfg, dec.to_jsonl()));

    let cfg = config(ExperimentKind::Oracle);
    let orc = run_ok(&cfg);
    verdicts.push(verdict(4, "end-to-end oracle", &selected(&orc, |r| r.name.starts_with("ks_oracle")), None));
    seeded.push((cfg, orc.to_jsonl()));

    let bounds = run_ok(&config(ExperimentKind::CumulantBounds));
    let failed: Vec<_> = selected(&bounds, |r| !r.pass);
    let checked = bounds.records.iter().filter(|r| r.rule != randhankel::harness::Rule::Info).count();
    verdicts.push(Verdict {
        id: 5,
        title: "cumulant sandwich and bounds",
        pass: failed.is_empty() && checked > 0 && bounds.wall_time < secs(5),
        detail: format!(
            "{checked} inequalities checked, {} violated{}; runtime {:.2}s (limit 5s)",
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(": {}", describe(&failed)) },
            bounds.wall_time.as_secs_f64()
        ),
    });

    let cfg = config(ExperimentKind::Clt);
    let clt = run_ok(&cfg);
    let named = selected(&clt, |r| {
        r.name == "ks_normal(1,1)" || r.name == "kappa2_over_n(1,1)" || r.name.starts_with("cov_ratio")
    });
    verdicts.push(verdict(6, "CLT", &named, Some((clt.wall_time, secs(300)))));
    seeded.push((cfg, clt.to_jsonl()));

    let cfg = config(ExperimentKind::Lln);
    let lln = run_ok(&cfg);
    let ladder = selected(&lln, |r| r.name.starts_with("lln_error(") || r.name.starts_with("lln_error_last"));
    verdicts.push(verdict(7, "LLN ladder", &ladder, Some((lln.wall_time, secs(5)))));
    seeded.push((cfg, lln.to_jsonl()));

    let mg = run_ok(&config(ExperimentKind::Modgauss));
    verdicts.push(verdict(8, "mod-Gaussian", &selected(&mg, |r| r.name.starts_with("max_gap")), None));

    let ldp = run_ok(&config(ExperimentKind::LdpClosedForm));
    let mut v = verdict(9, "LDP closed form", &selected(&ldp, |r| r.rule != randhankel::harness::Rule::Info), None);
    v.pass &= !ldp.notes.is_empty();
    v.detail = format!("{} records; flagged: {}", ldp.records.len(), ldp.notes.join(" | "));
    verdicts.push(v);

    let ineq = run_ok(&config(ExperimentKind::Inequalities));
    let mut v = verdict(10, "polygamma inequality suite", &selected(&ineq, |_| true), Some((ineq.wall_time, secs(1))));
    v.detail = format!("{} checks, {} violated; runtime {:.3}s", ineq.records.len(), ineq.failures().len(), ineq.wall_time.as_secs_f64());
    verdicts.push(v);

    let mut mismatched = Vec::new();
    for (cfg, first) in &seeded {
        for workers in [1, 3] {
            let again = run_ok(&ExperimentConfig { workers: Some(workers), ..cfg.clone() }).to_jsonl();
            if &again != first {
                mismatched.push(format!("{} (workers={workers})", cfg.kind.name()));
            }
        }
    }
    verdicts.push(Verdict {
        id: 11,
        title: "determinism",
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} seeded experiments byte-identical across reruns with 1 and 3 workers", seeded.len())
        } else {
            format!("differs: {}", mismatched.join(", "))
        },
    });

    verdicts.sort_by_key(|v| v.id);
    for v in &verdicts {
        println!("criterion {:>2} {:<30} {}  {}", v.id, v.title, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} of {} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
