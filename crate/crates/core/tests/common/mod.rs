//! Brute-force reference implementation used by the oracle and acceptance
//! tests. It shares no code with the library: plain loops, naive summation,
//! and the variance correction written with explicit `1/beta^2` terms.

#![allow(dead_code)]

use mdivw::summary_data::{SnpRecord, SummaryDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct Snp {
    pub id: String,
    pub g: f64,
    pub sg: f64,
    pub y: f64,
    pub sy: f64,
    pub sel: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Reference {
    pub included: Vec<bool>,
    pub theta1: f64,
    pub theta2: f64,
    pub v1: f64,
    pub v2: f64,
    pub v12: f64,
    pub kappa_hat: f64,
    pub psi_hat: f64,
    pub ivw: f64,
    pub ivw_se: f64,
    pub divw: f64,
    pub divw_se: f64,
    pub mdivw: f64,
    /// Leading variance term at the mdIVW estimate.
    pub leading: f64,
    /// `2 beta^2 delta_hat / theta2^4`.
    pub correction: f64,
    /// Sum of absolute values of the pieces of `correction`, for scaling
    /// tolerances on a difference of large terms.
    pub correction_scale: f64,
    pub variance: f64,
    pub tau2_raw: f64,
    /// Pleiotropy-adjusted pieces, using the clamped tau2.
    pub leading_tau: f64,
    pub correction_tau: f64,
    pub correction_tau_scale: f64,
    /// Residuals `(G - b g) / sqrt(sG^2 + b^2 sg^2)` at the mdIVW estimate,
    /// in input order, for included SNPs, with the magnitude of the terms
    /// in the numerator (scaled like the residual).
    pub residuals: Vec<(String, f64, f64)>,
}

pub fn reference(snps: &[Snp], lambda: f64) -> Reference {
    let included: Vec<bool> = snps
        .iter()
        .map(|s| {
            if lambda == 0.0 {
                true
            } else {
                let (b, se) = s.sel.unwrap();
                (b / se).abs() > lambda
            }
        })
        .collect();
    let sel: Vec<&Snp> = snps
        .iter()
        .zip(&included)
        .filter(|(_, &k)| k)
        .map(|(s, _)| s)
        .collect();

    let mut theta1 = 0.0;
    let mut theta2 = 0.0;
    let mut v1 = 0.0;
    let mut v2 = 0.0;
    let mut v12 = 0.0;
    let mut ivw_den = 0.0;
    let mut strength = 0.0;
    for s in &sel {
        let w = 1.0 / (s.sy * s.sy);
        let w2 = w * w;
        theta1 += w * s.g * s.y;
        theta2 += w * (s.g * s.g - s.sg * s.sg);
        v1 += w2
            * (s.sg.powi(2) * s.y.powi(2) + s.sy.powi(2) * s.g.powi(2)
                - s.sg.powi(2) * s.sy.powi(2));
        v2 += w2 * (4.0 * s.sg.powi(2) * s.g.powi(2) - 2.0 * s.sg.powi(4));
        v12 += 2.0 * w2 * s.sg.powi(2) * s.g * s.y;
        ivw_den += w * s.g * s.g;
        strength += s.g.powi(2) / s.sg.powi(2);
    }
    let n = sel.len() as f64;
    let kappa_hat = strength / n - 1.0;
    let psi_hat = kappa_hat * n.sqrt();

    let ivw = theta1 / ivw_den;
    let ivw_se = (1.0 / ivw_den).sqrt();
    let divw = theta1 / theta2;
    let leading_at = |b: f64, tau2: f64| {
        let mut acc = 0.0;
        for s in &sel {
            acc += s.g.powi(2) / s.sy.powi(2) * (1.0 + tau2 / s.sy.powi(2))
                + b * b * s.sg.powi(2) * (s.g.powi(2) + s.sg.powi(2)) / s.sy.powi(4);
        }
        acc / theta2.powi(2)
    };
    let divw_se = leading_at(divw, 0.0).sqrt();

    let bias = divw * (v2 / theta2.powi(2) - v12 / (theta1 * theta2));
    let mdivw = divw - bias;

    let tau2_raw = {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in &sel {
            num += ((s.y - mdivw * s.g).powi(2) - s.sy.powi(2) - mdivw.powi(2) * s.sg.powi(2))
                / s.sy.powi(2);
            den += 1.0 / s.sy.powi(2);
        }
        num / den
    };

    // delta_hat with explicit 1/b^2 terms; returns (2 b^2 delta / theta2^4, scale)
    let correction_at = |b: f64, tau2: f64| {
        let mut v1t = 0.0;
        let mut last = 0.0;
        let mut cubic = 0.0;
        for s in &sel {
            let inflated = s.sy.powi(2) + tau2;
            v1t += (s.sg.powi(2) * s.y.powi(2) + inflated * s.g.powi(2) - inflated * s.sg.powi(2))
                / s.sy.powi(4);
            cubic += s.sg.powi(6) / s.sy.powi(6) * (6.0 * s.g.powi(2) / s.sg.powi(2) + 2.0);
            last += 2.0 / (b * b) / s.sy.powi(4)
                * s.sg.powi(2)
                * s.g.powi(2)
                * (1.0 + tau2 / s.sy.powi(2));
        }
        let terms = [
            v1t * v2 / (b * b),
            -6.0 * v12 * v2 / b,
            2.0 * v12 * v12 / (b * b),
            3.0 * v2 * v2,
            -theta2 * cubic,
            -theta2 * last,
        ];
        let delta: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let k = 2.0 * b * b / theta2.powi(4);
        (k * delta, k * scale)
    };
    let leading = leading_at(mdivw, 0.0);
    let (correction, correction_scale) = correction_at(mdivw, 0.0);
    let tau2 = tau2_raw.max(0.0);
    let leading_tau = leading_at(mdivw, tau2);
    let (correction_tau, correction_tau_scale) = correction_at(mdivw, tau2);

    let residuals = sel
        .iter()
        .map(|s| {
            let d = (s.sy.powi(2) + mdivw.powi(2) * s.sg.powi(2)).sqrt();
            (
                s.id.clone(),
                (s.y - mdivw * s.g) / d,
                (s.y.abs() + (mdivw * s.g).abs()) / d,
            )
        })
        .collect();

    Reference {
        included,
        theta1,
        theta2,
        v1,
        v2,
        v12,
        kappa_hat,
        psi_hat,
        ivw,
        ivw_se,
        divw,
        divw_se,
        mdivw,
        leading,
        correction,
        correction_scale,
        variance: leading - correction,
        tau2_raw,
        leading_tau,
        correction_tau,
        correction_tau_scale,
        residuals,
    }
}

/// A small random dataset with moderately strong instruments and, when
/// `with_selection`, an independent selection association per SNP.
pub fn random_snps(rng: &mut ChaCha8Rng, p: usize, with_selection: bool) -> Vec<Snp> {
    let beta: f64 = rng.random_range(-1.0..1.0);
    (0..p)
        .map(|j| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let g: f64 = sign * rng.random_range(0.1..0.6);
            let sg = rng.random_range(0.005..0.08);
            let sy = rng.random_range(0.01..0.2);
            let z: f64 = StandardNormal.sample(rng);
            let y = beta * g + sy * z;
            let sel = with_selection.then(|| {
                let se = rng.random_range(0.01..0.3);
                let zs: f64 = StandardNormal.sample(rng);
                (g + se * zs, se)
            });
            Snp {
                id: format!("rs{}", j + 1),
                g,
                sg,
                y,
                sy,
                sel,
            }
        })
        .collect()
}

pub fn to_dataset(snps: &[Snp]) -> SummaryDataset {
    SummaryDataset::new(
        snps.iter()
            .map(|s| {
                let r = SnpRecord::new(s.id.clone(), s.g, s.sg, s.y, s.sy);
                match s.sel {
                    Some((b, se)) => r.with_selection(b, se),
                    None => r,
                }
            })
            .collect(),
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| <= tol * max(|a|, |b|, scale)`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

/// Runs the oracle comparison on `count` random datasets and returns a
/// description of the first mismatch, if any.
pub fn oracle_sweep(count: usize, seed: u64) -> Result<usize, String> {
    use mdivw::diagnostics::standardized_residuals;
    use mdivw::estimators::{self, compute_moments, iv_strength, mdivw_variance, select_ivs};

    let mut rng = rng(seed);
    let tol = 1e-12;
    let mut checked = 0;
    for case in 0..count {
        let p = rng.random_range(1..=5);
        let with_sel = rng.random_bool(0.5);
        let lambda = if with_sel {
            rng.random_range(0.0..3.0)
        } else {
            0.0
        };
        let snps = random_snps(&mut rng, p, with_sel);
        let r = reference(&snps, lambda);
        let ds = to_dataset(&snps);
        let mask = select_ivs(&ds, lambda).map_err(|e| format!("case {case}: {e}"))?;
        if mask.included != r.included {
            return Err(format!("case {case}: selection mask differs"));
        }
        if !r.included.iter().any(|&k| k) {
            if compute_moments(&ds, &mask).is_ok() {
                return Err(format!("case {case}: empty selection accepted"));
            }
            continue;
        }
        let fail = |what: &str, got: f64, want: f64| {
            format!("case {case} (p={p}, lambda={lambda}): {what} {got} vs {want}")
        };
        let check = |what: &str, got: f64, want: f64, scale: f64| {
            if close(got, want, tol, scale) {
                Ok(())
            } else {
                Err(fail(what, got, want))
            }
        };

        let m = compute_moments(&ds, &mask).unwrap();
        check("theta1", m.theta1, r.theta1, 0.0)?;
        check("theta2", m.theta2, r.theta2, 0.0)?;
        check("v1", m.v1, r.v1, 0.0)?;
        check("v2", m.v2, r.v2, 0.0)?;
        check("v12", m.v12, r.v12, 0.0)?;
        let st = iv_strength(&ds, &mask).unwrap();
        check("kappa_hat", st.kappa_hat, r.kappa_hat, 0.0)?;
        check("psi_hat", st.psi_hat, r.psi_hat, 0.0)?;

        let ivw = estimators::ivw(&ds, &mask).unwrap();
        check("ivw", ivw.beta, r.ivw, 0.0)?;
        check("ivw se", ivw.se, r.ivw_se, 0.0)?;
        let divw = estimators::divw(&ds, &mask).unwrap();
        check("divw", divw.beta, r.divw, 0.0)?;
        check("divw se", divw.se, r.divw_se, 0.0)?;

        let md = estimators::mdivw(&ds, &mask, false).unwrap();
        check("mdivw", md.beta, r.mdivw, 0.0)?;
        let selected = mask.apply(&ds).unwrap();
        let var = mdivw_variance(&selected, &m, md.beta, 0.0);
        check("leading", var.leading, r.leading, 0.0)?;
        let corr = 2.0 * var.beta2_delta / m.theta2.powi(4);
        check("correction", corr, r.correction, r.correction_scale)?;
        check(
            "variance",
            var.variance,
            r.variance,
            r.leading + r.correction_scale,
        )?;
        let want_se = if r.variance > 0.0 {
            r.variance.sqrt()
        } else {
            r.leading.sqrt()
        };
        check(
            "mdivw se",
            md.se,
            want_se,
            (r.leading + r.correction_scale).sqrt(),
        )?;

        let tau2 = estimators::tau_squared(&ds, &mask, md.beta).unwrap();
        check("tau2", tau2, r.tau2_raw, 0.0)?;
        let var_t = mdivw_variance(&selected, &m, md.beta, tau2.max(0.0));
        check("leading tau", var_t.leading, r.leading_tau, 0.0)?;
        let corr_t = 2.0 * var_t.beta2_delta / m.theta2.powi(4);
        check(
            "correction tau",
            corr_t,
            r.correction_tau,
            r.correction_tau_scale,
        )?;

        let res = standardized_residuals(&ds, &mask, md.beta).unwrap();
        for (id, want, scale) in &r.residuals {
            let got = res
                .entries
                .iter()
                .find(|e| &e.snp_id == id)
                .unwrap()
                .residual;
            check("residual", got, *want, *scale)?;
        }
        checked += 1;
    }
    Ok(checked)
}
