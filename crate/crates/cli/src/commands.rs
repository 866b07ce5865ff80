use anyhow::Result;
use serde::Serialize;

use prefseq_core::boundaries::{compute_boundaries, BoundarySet};
use prefseq_core::simulation::{sweep, verify_increments, IncrementCheck, SweepRow};
use prefseq_core::{Design, Effect, Outcome, Scenario, SpendingFamily};

use crate::config::RunConfig;
use crate::output::{sig6, write_output, Table};

#[derive(Serialize)]
struct DesignReport {
    family: SpendingFamily,
    outcome: Outcome,
    effect: Effect,
    fixed_n_raw: f64,
    fixed_n: u64,
    inflation: f64,
    max_n: u64,
    expected_n: f64,
    info_fractions: Vec<f64>,
    per_analysis_n: Vec<u64>,
    per_analysis_new: Vec<u64>,
    cum_alpha: Vec<f64>,
    z_bounds: Vec<f64>,
    stop_prob: Vec<f64>,
}

pub fn design(c: &RunConfig) -> Result<()> {
    let effects = c.effects()?;
    let mut reports = Vec::new();
    for family in c.families()? {
        let d = Design::build(c.params(family)?, effects)?;
        reports.push(DesignReport {
            family,
            outcome: effects.outcome,
            effect: c.effect,
            fixed_n_raw: d.fixed_n_raw,
            fixed_n: d.fixed_n,
            inflation: d.inflation,
            max_n: d.plan.max_n,
            expected_n: d.expected_n(),
            info_fractions: d.bounds.info_fractions.clone(),
            per_analysis_n: d.plan.per_analysis_n.clone(),
            per_analysis_new: d.plan.per_analysis_new.clone(),
            cum_alpha: d.bounds.cum_alpha.clone(),
            z_bounds: d.bounds.z_bounds.clone(),
            stop_prob: d.stopping_probabilities(),
        });
    }

    let mut table = Table::new([
        "family", "outcome", "effect", "fixed_n", "inflation", "max_n", "analysis", "info_fraction", "n", "new_n",
        "cum_alpha", "z_bound", "stop_prob",
    ]);
    for r in &reports {
        println!(
            "{} {} {}: fixed N {} (unrounded {}), inflation {}, max N {}, expected N {}",
            r.family,
            r.outcome,
            r.effect,
            r.fixed_n,
            sig6(r.fixed_n_raw),
            sig6(r.inflation),
            r.max_n,
            sig6(r.expected_n)
        );
        println!("  {:>8} {:>8} {:>8} {:>8} {:>12} {:>9} {:>9}", "analysis", "info", "N", "new", "cum_alpha", "z_bound", "stop_p");
        for l in 0..r.per_analysis_n.len() {
            println!(
                "  {:>8} {:>8} {:>8} {:>8} {:>12} {:>9} {:>9}",
                l + 1,
                sig6(r.info_fractions[l]),
                r.per_analysis_n[l],
                r.per_analysis_new[l],
                sig6(r.cum_alpha[l]),
                sig6(r.z_bounds[l]),
                sig6(r.stop_prob[l])
            );
            table.push(vec![
                r.family.to_string(),
                r.outcome.to_string(),
                r.effect.to_string(),
                r.fixed_n.to_string(),
                sig6(r.inflation),
                r.max_n.to_string(),
                (l + 1).to_string(),
                sig6(r.info_fractions[l]),
                r.per_analysis_n[l].to_string(),
                r.per_analysis_new[l].to_string(),
                sig6(r.cum_alpha[l]),
                sig6(r.z_bounds[l]),
                sig6(r.stop_prob[l]),
            ]);
        }
    }
    write_output(c, &table, &reports)
}

pub fn boundaries(c: &RunConfig) -> Result<()> {
    let info = c.info()?;
    let sets: Vec<BoundarySet> =
        c.families()?.into_iter().map(|f| compute_boundaries(f, c.alpha, &info)).collect::<Result<_, _>>()?;
    let mut table = Table::new(["family", "analysis", "info_fraction", "cum_alpha", "alpha_spent", "z_bound"]);
    println!("{:>8} {:>8} {:>8} {:>12} {:>12} {:>9}", "family", "analysis", "info", "cum_alpha", "spent", "z_bound");
    for b in &sets {
        let family = b.family.map(|f| f.to_string()).unwrap_or_default();
        for (l, spent) in b.spent_increments().into_iter().enumerate() {
            let row = vec![
                family.clone(),
                (l + 1).to_string(),
                sig6(b.info_fractions[l]),
                sig6(b.cum_alpha[l]),
                sig6(spent),
                sig6(b.z_bounds[l]),
            ];
            println!("{:>8} {:>8} {:>8} {:>12} {:>12} {:>9}", row[0], row[1], row[2], row[3], row[4], row[5]);
            table.push(row);
        }
    }
    write_output(c, &table, &sets)
}

pub fn simulate(c: &RunConfig) -> Result<()> {
    let looks = c.looks;
    let rows = sweep(&c.sweep_grid()?, c.nsim, c.seed, c.workers)?;
    let mut header: Vec<String> = ["phi", "theta", "d_tau", "d_nu", "d_pi", "family", "fixed_n", "max_n", "avg_n", "sd_n", "ratio", "reject_rate"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend((1..=looks).map(|l| format!("stop_p{l}")));
    header.extend(["skip_rate", "seed", "nsim", "error"].map(String::from));
    let mut table = Table::new(header);
    for r in &rows {
        table.push(sweep_record(r, looks));
        print_sweep_row(r);
    }
    write_output(c, &table, &rows)
}

fn sweep_record(r: &SweepRow, looks: usize) -> Vec<String> {
    let opt = |n: Option<u64>| n.map(|v| v.to_string()).unwrap_or_default();
    let mut rec = vec![
        sig6(r.phi),
        sig6(r.theta),
        sig6(r.d_tau),
        sig6(r.d_nu),
        sig6(r.d_pi),
        r.family.to_string(),
        opt(r.fixed_n),
        opt(r.max_n),
    ];
    match &r.summary {
        Some(s) => {
            rec.extend([s.avg_n, s.sd_n, s.ratio_to_fixed, s.reject_rate].map(sig6));
            rec.extend(s.stop_prob_per_analysis.iter().map(|&p| sig6(p)));
            rec.push(sig6(s.skip_rate));
        }
        None => rec.extend(std::iter::repeat_n(String::new(), 5 + looks)),
    }
    rec.extend([r.seed.to_string(), r.nsim.to_string(), r.error.clone().unwrap_or_default()]);
    rec
}

fn print_sweep_row(r: &SweepRow) {
    let cell = format!(
        "phi {} theta {} dtau {} dnu {} dpi {} {}",
        sig6(r.phi),
        sig6(r.theta),
        sig6(r.d_tau),
        sig6(r.d_nu),
        sig6(r.d_pi),
        r.family
    );
    match (&r.summary, &r.error) {
        (Some(s), _) => println!(
            "{cell}: fixed N {}, max N {}, avg N {}, sd {}, ratio {}, reject {} (se {}), stop {:?}, skip {}",
            s.fixed_n,
            s.max_n,
            sig6(s.avg_n),
            sig6(s.sd_n),
            sig6(s.ratio_to_fixed),
            sig6(s.reject_rate),
            sig6(s.reject_rate_mc_se),
            s.stop_prob_per_analysis.iter().map(|&p| sig6(p)).collect::<Vec<_>>(),
            sig6(s.skip_rate)
        ),
        (None, e) => println!("{cell}: error: {}", e.as_deref().unwrap_or("unknown")),
    }
}

pub fn verify_increments_cmd(c: &RunConfig) -> Result<()> {
    let family = c.families()?[0];
    let design = Design::build(c.params(family)?, c.effects()?)?;
    let scenario = Scenario::new(&design, c.hypothesis)?;
    let check: IncrementCheck = verify_increments(&scenario, c.nsim, c.seed, c.workers)?;
    let mut table = Table::new(["effect", "period_s", "period_t", "cov", "mc_se"]);
    println!(
        "per-period covariance over {} replicates ({} dropped), off-diagonal tolerance {}",
        check.nsim,
        check.dropped,
        sig6(check.threshold)
    );
    for m in &check.matrices {
        println!("{} statistic:", m.effect);
        for (s, row) in m.cov.iter().enumerate() {
            let cells: Vec<String> =
                row.iter().zip(&m.se[s]).map(|(v, e)| format!("{:>10} ({})", sig6(*v), sig6(*e))).collect();
            println!("  {}", cells.join("  "));
            for (t, v) in row.iter().enumerate() {
                table.push(vec![m.effect.to_string(), (s + 1).to_string(), (t + 1).to_string(), sig6(*v), sig6(m.se[s][t])]);
            }
        }
    }
    let (lo, hi) = IncrementCheck::DIAGONAL_RANGE;
    println!(
        "{}: off-diagonals within ±{} {}, diagonals within [{lo}, {hi}] {}",
        if check.passed() { "PASS" } else { "FAIL" },
        sig6(check.threshold),
        if check.off_diagonal_ok() { "yes" } else { "no" },
        if check.diagonal_ok() { "yes" } else { "no" }
    );
    write_output(c, &table, std::slice::from_ref(&check))
}
