//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use concop::lpdecomp::{make_bump, schur_integrals, st_eps_bounds, LpOperators, ScaleStack, SchurSamples};
use concop::quad::QuadOptions;
use concop::sets::{sup_thinness, thin_profile, thinness_ratio, IntervalSet, SetFamily};
use concop::spectral::{
    block_decomposition, ls_delta, random_vector, scaling_check, spectrum, svw_lambda_min, tail_norm_curve,
    ConcentrationOp, Grid, GridFunction, Method, PowerOptions, Side, SpectrumOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn iv(lo: f64, hi: f64) -> IntervalSet {
    IntervalSet::single(lo, hi).unwrap()
}

fn default_grid() -> Grid {
    Grid::new(64.0, 1 << 13).unwrap()
}

fn power(tol: f64, max_iter: usize) -> PowerOptions {
    PowerOptions { tol, max_iter, seed: 0 }
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn c1_thinness() -> Outcome {
    let p = thin_profile(&SetFamily::e2(), 200.0, &[10.0, 100.0], 1e-4).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for e in &p.entries {
        let bound = 1.0 / e.r.ln();
        let ok = e.certified_error <= 1e-3 && e.theta <= bound + 1e-3;
        pass &= ok;
        parts.push(format!(
            "R={} theta={:.6} err={:.1e} 1/logR={:.6} excess={:+.2e}",
            e.r,
            e.theta,
            e.certified_error,
            bound,
            e.theta - bound
        ));
    }
    let e1 = SetFamily::e1().window(100.0);
    for n in [2.0f64, 3.0, 4.0] {
        let r = thinness_ratio(&e1, n * n);
        pass &= r == 1.0;
        parts.push(format!("E1 ratio(x_{n})={r}"));
    }
    outcome(pass, parts.join("; "))
}

fn c2_frobenius() -> Outcome {
    let cases = [(iv(-0.5, 0.5), iv(-0.5, 0.5)), (iv(0.0, 2.0), iv(-0.5, 0.5))];
    let coarse = default_grid();
    let fine = Grid::new(128.0, 1 << 14).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (e, f) in &cases {
        let exact = (e.measure() * f.measure()).sqrt();
        let e1 = (ConcentrationOp::new(coarse, e, f).frobenius() - exact).abs();
        let e2 = (ConcentrationOp::new(fine, e, f).frobenius() - exact).abs();
        let ratio = e2 / e1;
        let ok = e1 / exact <= 0.02 && (0.35..=0.65).contains(&ratio);
        pass &= ok;
        parts.push(format!("|E||F|={:.1} rel.err={:.2e} halving ratio={ratio:.4}", exact * exact, e1 / exact));
    }
    outcome(pass, parts.join("; "))
}

/// `P_E Q_F P_E` assembled entry by entry from the sampled transform pair.
fn dense_oracle(grid: &Grid, e: &IntervalSet, f: &IntervalSet) -> DMatrix<Complex64> {
    let n = grid.n();
    let h = grid.h();
    let l = grid.length();
    let in_e: Vec<bool> = (0..n).map(|k| e.contains(grid.node(k) + 0.5 * h)).collect();
    let freqs: Vec<f64> = (0..n)
        .map(|i| grid.freq(i))
        .filter(|xi| f.contains(xi + 0.5 / l))
        .collect();
    DMatrix::from_fn(n, n, |a, b| {
        if !(in_e[a] && in_e[b]) {
            return Complex64::new(0.0, 0.0);
        }
        let d = grid.node(a) - grid.node(b);
        freqs
            .iter()
            .map(|xi| Complex64::from_polar(h / l, 2.0 * std::f64::consts::PI * xi * d))
            .sum()
    })
}

fn c3_trace() -> Outcome {
    let half = iv(-0.5, 0.5);
    let op = ConcentrationOp::new(default_grid(), &half, &half);
    let rep = spectrum(&op, 5, Method::Lanczos, &SpectrumOptions::default()).unwrap();
    let trace_err = (rep.trace - 1.0).abs();

    let small = Grid::new(32.0, 1024).unwrap();
    let m = dense_oracle(&small, &half, &half);
    let mut vals: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let dense = spectrum(
        &ConcentrationOp::new(small, &half, &half),
        1024,
        Method::Dense,
        &SpectrumOptions::default(),
    )
    .unwrap();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals[0];
    let agree = vals
        .iter()
        .zip(&dense.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let descending = dense.eigenvalues.windows(2).all(|w| w[0] >= w[1]);
    let in_range = dense.eigenvalues.iter().all(|&v| (-1e-10..=1.0 + 1e-10).contains(&v));
    let pass = trace_err <= 0.01 && in_range && descending && agree <= 1e-10;
    outcome(
        pass,
        format!(
            "trace={:.6} (rel.err {trace_err:.1e}); N=1024 oracle range [{lo:.2e}, {hi:.12}], max |oracle-dense|={agree:.1e}, descending={descending}",
            rep.trace
        ),
    )
}

fn c4_blocks() -> Outcome {
    let g = default_grid();
    let e = SetFamily::e2().window(32.0);
    let f = iv(-4.0, 4.0);
    let mut worst = 0.0f64;
    for r in [5.0, 10.0] {
        let d = block_decomposition(&e, &f, r, &g).unwrap();
        for seed in 0..10u64 {
            let v = GridFunction::new(g, Side::Space, random_vector(g.n(), 100 + seed)).unwrap();
            worst = worst.max(d.residual(&v).unwrap());
        }
    }
    outcome(worst <= 1e-12, format!("max relative residual {worst:.2e} over R in {{5,10}} x 10 inputs"))
}

fn c5_scaling() -> Outcome {
    let g = default_grid();
    let opts = power(1e-8, 5000);
    let mut worst = 0.0f64;
    let mut identical = true;
    for a in [iv(-1.0, 1.0), SetFamily::e2().window(16.0)] {
        for r in [2.0, 4.0, 10.0] {
            let c = scaling_check(&a, r, &g, &opts).unwrap();
            worst = worst.max(c.gap);
            identical &= c.identical_masks;
        }
    }
    outcome(worst <= 1e-10, format!("max gap {worst:.2e}, identical masks {identical}"))
}

fn c6_tail_norms() -> Outcome {
    let g = Grid::new(256.0, 1 << 16).unwrap();
    let radii = [5.0, 10.0, 20.0, 40.0];
    let opts = power(1e-8, 20000);
    let e2 = SetFamily::e2().window(64.0);
    let t2 = tail_norm_curve(&e2, &e2, &radii, &g, &opts).unwrap();
    let mono = |col: &dyn Fn(usize) -> f64| (1..radii.len()).all(|i| col(i) <= col(i - 1) + 1e-8);
    let r = &t2.rows;
    let e2_mono = mono(&|i| r[i].norm_finf_e) && mono(&|i| r[i].norm_f_einf) && mono(&|i| r[i].norm_finf_einf);
    let e2_drop = r[3].norm_finf_einf < 0.8 * r[0].norm_finf_einf;
    let e2_conv = r.iter().all(|row| row.converged);

    let e1 = SetFamily::e1().window(64.0);
    let t1 = tail_norm_curve(&e1, &e1, &radii, &g, &opts).unwrap();
    let q = &t1.rows;
    let e1_holds = q[3].norm_finf_einf >= 0.5 * q[0].norm_finf_einf;

    let fmt = |rows: &[concop::spectral::TailNormRow]| {
        rows.iter()
            .map(|x| format!("R={}:({:.4},{:.4},{:.4})", x.r, x.norm_finf_e, x.norm_f_einf, x.norm_finf_einf))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        e2_mono && e2_drop && e2_conv && e1_holds,
        format!(
            "E2 monotone={e2_mono} drop={e2_drop} converged={e2_conv} [{}]; E1 far-block ratio R40/R5={:.3} (needs >= 0.5) [{}]",
            fmt(r),
            q[3].norm_finf_einf / q[0].norm_finf_einf,
            fmt(q)
        ),
    )
}

fn c7_adjoint() -> Outcome {
    let g = Grid::new(64.0, 4096).unwrap();
    let opts = power(1e-10, 20000);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let so = SpectrumOptions {
        tol: 1e-12,
        ..SpectrumOptions::default()
    };
    let mut worst = 0.0f64;
    let mut lanczos_gap = 0.0f64;
    let mut conv = true;
    for _ in 0..3 {
        let mut pick = || {
            let c = rng.gen_range(-8.0..8.0);
            let w = rng.gen_range(0.5..4.0);
            iv(c - 0.5 * w, c + 0.5 * w)
        };
        let (a, b) = (pick(), pick());
        let n1 = ConcentrationOp::new(g, &a, &b).op_norm(&opts);
        let n2 = ConcentrationOp::new(g, &b, &a).op_norm(&opts);
        conv &= n1.converged && n2.converged;
        worst = worst.max((n1.norm - n2.norm).abs());
        let top = |op: ConcentrationOp| spectrum(&op, 1, Method::Lanczos, &so).unwrap().eigenvalues[0].sqrt();
        lanczos_gap = lanczos_gap.max((top(ConcentrationOp::new(g, &a, &b)) - top(ConcentrationOp::new(g, &b, &a))).abs());
    }
    outcome(
        worst <= 2e-6,
        format!("max |gap| {worst:.2e} on L=64, N=4096 (power converged={conv}); Lanczos cross-check gap {lanczos_gap:.1e}"),
    )
}

fn c8_littlewood_paley() -> Outcome {
    let g = Grid::new(32.0, 1024).unwrap();
    let stack = ScaleStack::for_grid(&g);
    let reach = 2f64.powi(stack.j_max() as i32);
    let xs: Vec<f64> = (0..1000).map(|i| -reach + 2.0 * reach * i as f64 / 999.0).collect();
    let pu = xs.iter().map(|&x| (stack.partition(x) - 1.0).abs()).fold(0.0, f64::max);
    let most = xs.iter().map(|&x| stack.active(x).len()).max().unwrap();

    let ops = LpOperators::new(&g, stack).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let band = g.n() / 4;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let coeffs: Vec<(f64, Complex64)> = (0..band)
            .map(|i| {
                let xi = (i as f64 - band as f64 / 2.0) / g.length();
                (xi, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let v: Vec<Complex64> = (0..g.n())
            .map(|k| {
                let x = g.node(k);
                coeffs
                    .iter()
                    .map(|(xi, c)| c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * xi * x))
                    .sum()
            })
            .collect();
        let s = ops.s(&v);
        let t = ops.t(&v);
        let num: f64 = s.iter().zip(&t).zip(&v).map(|((a, b), c)| (a + b - c).norm_sqr()).sum();
        let den: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        worst = worst.max((num / den).sqrt());
    }
    outcome(
        pu <= 1e-14 && worst <= 1e-10 && most <= 3,
        format!("partition error {pu:.1e}; S+T-Id {worst:.1e}; max active windows {most}"),
    )
}

struct CombPoint {
    alpha: f64,
    set: IntervalSet,
}

fn comb_sweep() -> Vec<CombPoint> {
    [0.3, 0.1, 0.03]
        .iter()
        .map(|&eps| {
            let fam = SetFamily::comb(eps, 8.0).unwrap();
            CombPoint {
                alpha: sup_thinness(&fam, 8.0, 1e-4).unwrap().theta,
                set: fam.window(8.0),
            }
        })
        .collect()
}

fn c9_schur(sweep: &[CombPoint]) -> Outcome {
    let g = default_grid();
    let bump = make_bump().unwrap();
    let stack = ScaleStack::for_grid(&g);
    let xs: Vec<f64> = (0..=160).map(|i| -10.0 + i as f64 * 0.125).collect();
    let samples = SchurSamples {
        x: xs.clone(),
        y: xs.clone(),
        xi: xs.clone(),
        eta: xs,
    };
    let base = QuadOptions {
        tol: 1e-8,
        ..QuadOptions::default()
    };
    let doubled = QuadOptions {
        tol: 0.5 * base.tol,
        initial_panels: 2 * base.initial_panels,
        ..base
    };
    let mut item3 = Vec::new();
    let mut drift = 0.0f64;
    for p in sweep {
        let a = schur_integrals(&p.set, &p.set, &bump, &stack, &samples, &base);
        let b = schur_integrals(&p.set, &p.set, &bump, &stack, &samples, &doubled);
        item3.push(a[2].sup_estimate);
        for k in [0, 1, 3, 4] {
            drift = drift.max((a[k].sup_estimate - b[k].sup_estimate).abs() / b[k].sup_estimate);
        }
    }
    let alphas: Vec<f64> = sweep.iter().map(|p| p.alpha).collect();
    let slope = loglog_slope(&alphas, &item3);
    outcome(
        (0.7..=1.3).contains(&slope) && drift <= 0.01,
        format!("alpha={alphas:.4?} item iii={item3:.4?} slope={slope:.3}; max relative drift of i,ii,iv,v {drift:.1e}"),
    )
}

fn c10_eps_estimates(sweep: &[CombPoint]) -> Outcome {
    let g = default_grid();
    // the norm error is of order the squared residual, far below the slope window
    let opts = power(1e-6, 20000);
    let mut norms = Vec::new();
    let mut conv = true;
    for p in sweep {
        let r = st_eps_bounds(&p.set, &p.set, &g, ScaleStack::for_grid(&g), &opts).unwrap();
        conv &= r.norm_se.converged;
        norms.push(r.norm_se.norm);
    }
    let alphas: Vec<f64> = sweep.iter().map(|p| p.alpha).collect();
    let slope = loglog_slope(&alphas, &norms);
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && (0.3..=0.8).contains(&slope),
        format!("|S P_E|={norms:.4?} slope={slope:.3} converged={conv}"),
    )
}

fn c11_logvinenko_sereda(sweep: &[CombPoint]) -> Outcome {
    let g = default_grid();
    let opts = power(1e-8, 20000);
    let deltas: Vec<f64> = sweep.iter().map(|p| ls_delta(&p.set, &g, &opts).unwrap().norm).collect();
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
    let empty = ls_delta(&IntervalSet::empty(), &g, &opts).unwrap().norm;
    let full = ls_delta(&iv(-32.0, 32.0), &g, &opts).unwrap().norm;
    outcome(
        decreasing && empty.abs() <= 1e-10 && (full - 1.0).abs() <= 1e-10,
        format!("delta={deltas:.4?}; empty={empty:.1e}; full-1={:.1e}", full - 1.0),
    )
}

fn c12_svw(sweep: &[CombPoint]) -> Outcome {
    let g = default_grid();
    let opts = power(1e-8, 20000);
    let thin = &sweep[2].set;
    let comb = svw_lambda_min(thin, thin, &g, &opts).unwrap();
    let whole = iv(-32.0, 32.0);
    let full = svw_lambda_min(&whole, &whole, &g, &opts).unwrap();
    let empty = svw_lambda_min(&IntervalSet::empty(), &IntervalSet::empty(), &g, &opts).unwrap();
    outcome(
        comb.lambda_min > 0.01 && full.lambda_min.abs() <= 1e-8 && (empty.lambda_min - 2.0).abs() <= 1e-10,
        format!(
            "comb lambda_min={:.4} (converged {}); full={:.1e}; empty-2={:.1e}",
            comb.lambda_min,
            comb.converged,
            full.lambda_min,
            empty.lambda_min - 2.0
        ),
    )
}

fn c13_compactness() -> Outcome {
    let g = Grid::new(32.0, 2048).unwrap();
    let so = SpectrumOptions::default();
    let e2 = SetFamily::e2().window(8.0);
    let thick = iv(-8.0, 8.0);
    let a = spectrum(&ConcentrationOp::new(g, &e2, &e2), 50, Method::Dense, &so).unwrap();
    let b = spectrum(&ConcentrationOp::new(g, &thick, &thick), 50, Method::Dense, &so).unwrap();
    let half = 0.5 * a.trace.sqrt();
    let m = iv(-half, half);
    let c = spectrum(&ConcentrationOp::new(g, &m, &m), 50, Method::Dense, &so).unwrap();
    outcome(
        a.eigenvalues[49] < b.eigenvalues[49],
        format!(
            "lambda_50: E2 {:.3e} (trace {:.3}) vs [-8,8] {:.3e} (trace {:.1}); matched-trace [-{half:.3},{half:.3}] {:.3e} (trace {:.3})",
            a.eigenvalues[49], a.trace, b.eigenvalues[49], b.trace, c.eigenvalues[49], c.trace
        ),
    )
}

fn main() -> ExitCode {
    let sweep = comb_sweep();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("thinness ground truth", Box::new(c1_thinness)),
        ("Hilbert-Schmidt identity", Box::new(c2_frobenius)),
        ("trace identity and dense spectrum", Box::new(c3_trace)),
        ("block decomposition exactness", Box::new(c4_blocks)),
        ("scaling covariance", Box::new(c5_scaling)),
        ("tail-norm decay", Box::new(c6_tail_norms)),
        ("adjoint symmetry", Box::new(c7_adjoint)),
        ("Littlewood-Paley suite", Box::new(c8_littlewood_paley)),
        ("Schur scaling", Box::new(|| c9_schur(&sweep))),
        ("eps-estimates", Box::new(|| c10_eps_estimates(&sweep))),
        ("Logvinenko-Sereda trend", Box::new(|| c11_logvinenko_sereda(&sweep))),
        ("SVW positivity", Box::new(|| c12_svw(&sweep))),
        ("compactness evidence", Box::new(c13_compactness)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({name}) [{:.1}s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
