use super::{majority_check, median, Check, ExperimentOptions};
use crate::ensemble::map_replicates;
use crate::error::Result;
use crate::gaussianpaths::{BmGenerator, CirculantEmbedding, GridSpec};
use crate::par::pairwise_sum;
use crate::pathstats::{
    empirical_acf, lrd_diagnostic, p_variation, quadratic_variation, rescaled_range_hurst, theoretical_acf,
    variation_index, Verdict,
};

const SEEDS: usize = 20;

fn fbm(hurst: f64, n: usize) -> Result<CirculantEmbedding> {
    CirculantEmbedding::new(GridSpec::new(1.0, n)?, hurst)
}

pub(super) fn e9(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let n = 1 << 14;
    let gen = BmGenerator {
        grid: GridSpec::new(1.0, n)?,
    };
    let qv = map_replicates(&gen, opts.root_for(0), SEEDS, opts.exec, |p| Ok(quadratic_variation(p)))?;
    let worst = qv.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    let mut checks = vec![Check::within(
        format!("worst QV(BM) over {SEEDS} seeds, n=2^14"),
        1.0,
        1.0 + worst,
        0.05,
    )];
    for (k, (hurst, want)) in [
        (0.75, Verdict::ConvergesToZero),
        (0.25, Verdict::Diverges),
        (0.5, Verdict::Stabilizes),
    ]
    .into_iter()
    .enumerate()
    {
        let verdicts = map_replicates(&fbm(hurst, n)?, opts.root_for(1 + k as u64), SEEDS, opts.exec, |p| {
            Ok(p_variation(p, 2.0, 6)?.verdict)
        })?;
        checks.push(majority_check(
            format!("2-variation verdict {want:?} at H={hurst} (seeds agreeing of {SEEDS})"),
            &verdicts,
            &want,
        ));
    }
    Ok(checks)
}

pub(super) fn e10(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    const SWEEP: usize = 50;
    let mut checks = Vec::new();
    for (k, hurst) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let mut rs_err = Vec::new();
        let mut vi_err = Vec::new();
        for lg in [10, 12, 14] {
            let est = map_replicates(&fbm(hurst, 1 << lg)?, opts.root_for(k as u64), SWEEP, opts.exec, |p| {
                Ok((rescaled_range_hurst(&p.increments())?.h_hat, variation_index(p)?.h_hat))
            })?;
            let rs: Vec<f64> = est.iter().map(|e| e.0).collect();
            let vi: Vec<f64> = est.iter().map(|e| e.1).collect();
            if lg == 12 {
                checks.push(Check::within(format!("R/S median H at H={hurst}, n=2^12"), hurst, median(rs.clone()), 0.1));
                checks.push(Check::within(
                    format!("variation index median H at H={hurst}, n=2^12"),
                    hurst,
                    median(vi.clone()),
                    0.1,
                ));
            }
            rs_err.push((lg, median(rs.iter().map(|h| (h - hurst).abs()).collect())));
            vi_err.push((lg, median(vi.iter().map(|h| (h - hurst).abs()).collect())));
        }
        for (name, errs) in [("R/S", &rs_err), ("variation index", &vi_err)] {
            for w in errs.windows(2) {
                checks.push(Check::below(
                    format!("{name} median |error| at H={hurst}: n=2^{} below n=2^{}", w[1].0, w[0].0),
                    w[0].1,
                    w[1].1,
                ));
            }
        }
    }
    Ok(checks)
}

pub(super) fn e11(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, hurst) in [0.25, 0.75].into_iter().enumerate() {
        let lag1 = map_replicates(&fbm(hurst, 1 << 14)?, opts.root_for(k as u64), SEEDS, opts.exec, |p| {
            Ok(empirical_acf(p, 1)?[1])
        })?;
        checks.push(Check::within(
            format!("mean lag-1 increment ACF at H={hurst} over {SEEDS} seeds"),
            theoretical_acf(hurst, 1)?,
            pairwise_sum(&lag1) / SEEDS as f64,
            0.05,
        ));
        let d = lrd_diagnostic(hurst, 10_000)?;
        checks.push(Check::within(
            format!("asymptote ratio at n=10^4, H={hurst}"),
            1.0,
            *d.asymptote_ratio.last().unwrap(),
            0.01,
        ));
    }
    // Σ|r_H(n)| keeps growing over the last decade only when H > 1/2
    let long = lrd_diagnostic(0.75, 1_000_000)?.last_decade_growth();
    checks.push(Check::at_least("partial-sum growth over (10^5, 10^6] at H=0.75", 0.01, long));
    let short = lrd_diagnostic(0.25, 1_000_000)?.last_decade_growth();
    checks.push(Check::below("partial-sum growth over (10^5, 10^6] at H=0.25", 1e-3, short));
    Ok(checks)
}
