use serde::Serialize;
use serde_json::{json, Value};

use concop::lpdecomp::{make_bump, schur_integrals, ScaleStack, SchurSamples};
use concop::quad::QuadOptions;
use concop::sets::thin_profile;
use concop::spectral::{
    block_decomposition, ls_delta, random_vector, scaling_check, spectrum, tail_norm_curve, ConcentrationOp, Grid,
    GridFunction, PowerOptions, Side, SpectrumOptions,
};

use crate::config::RunConfig;
use crate::plot::Plot;
use crate::Failure;

/// What a command produced, before anything is written.
pub struct Report {
    pub result: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub plot: Option<Plot>,
    /// Set when a numerical routine stopped short of its tolerance.
    pub shortfall: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn grid(cfg: &RunConfig) -> Result<Grid, Failure> {
    Ok(Grid::new(cfg.length, cfg.n)?)
}

fn power(cfg: &RunConfig) -> PowerOptions {
    PowerOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        seed: cfg.seed,
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    match cfg.command.as_str() {
        "profile" => profile(cfg),
        "spectrum" => spectrum_cmd(cfg),
        "tailnorm" => tailnorm(cfg),
        "lsdelta" => lsdelta(cfg),
        "schur" => schur(cfg),
        "decomp" => decomp(cfg),
        "scalecheck" => scalecheck(cfg),
        other => Err(Failure::Input(format!("unknown command `{other}`"))),
    }
}

fn profile(cfg: &RunConfig) -> Result<Report, Failure> {
    let (family, window) = cfg.first_set()?.resolve()?;
    let p = thin_profile(&family, window, cfg.radii_required()?, cfg.tol)?;
    let widened: Vec<f64> = p.entries.iter().filter(|e| e.widened).map(|e| e.r).collect();
    let rows = p
        .entries
        .iter()
        .map(|e| {
            vec![
                num(e.r),
                num(e.theta),
                num(e.certified_error),
                opt(e.witness),
                e.widened.to_string(),
            ]
        })
        .collect();
    let plot = Plot::new("thinness profile", "R", "theta", false)
        .series("theta", p.entries.iter().map(|e| (e.r, e.theta)).collect());
    Ok(Report {
        result: to_value(&p),
        csv_header: vec!["R", "theta", "err", "witness", "widened"],
        csv_rows: rows,
        plot: Some(plot),
        shortfall: (!widened.is_empty())
            .then(|| format!("no certified bound beyond the window at R = {widened:?}")),
    })
}

fn spectrum_cmd(cfg: &RunConfig) -> Result<Report, Failure> {
    let op = ConcentrationOp::new(grid(cfg)?, &cfg.first_set()?.materialize()?, &cfg.second_set()?.materialize()?);
    let opts = SpectrumOptions {
        dense_cap: cfg.dense_cap,
        tol: cfg.tol,
        seed: cfg.seed,
        max_steps: cfg.max_iter,
    };
    let rep = spectrum(&op, cfg.k, cfg.method.into(), &opts)?;
    let rows = rep
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), num(*v)])
        .collect();
    let floor = 1e-18;
    let plot = Plot::new("spectrum of P_E Q_F P_E", "index", "eigenvalue", true).series(
        "lambda",
        rep.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64, v.max(floor)))
            .collect(),
    );
    Ok(Report {
        result: to_value(&rep),
        csv_header: vec!["index", "eigenvalue"],
        csv_rows: rows,
        plot: Some(plot),
        shortfall: (!rep.converged).then(|| format!("eigensolver residual {:e} above tol", rep.residual)),
    })
}

fn tailnorm(cfg: &RunConfig) -> Result<Report, Failure> {
    let e = cfg.first_set()?.materialize()?;
    let f = cfg.second_set()?.materialize()?;
    let table = tail_norm_curve(&e, &f, cfg.radii_required()?, &grid(cfg)?, &power(cfg))?;
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.r),
                num(r.norm_finf_e),
                num(r.norm_f_einf),
                num(r.norm_finf_einf),
                r.converged.to_string(),
                num(r.max_residual),
            ]
        })
        .collect();
    let col = |f: fn(&concop::spectral::TailNormRow) -> f64| table.rows.iter().map(|r| (r.r, f(r))).collect();
    let plot = Plot::new("tail block norms", "R", "norm", false)
        .series("FinfE", col(|r| r.norm_finf_e))
        .series("FEinf", col(|r| r.norm_f_einf))
        .series("FinfEinf", col(|r| r.norm_finf_einf));
    let stalled: Vec<f64> = table.rows.iter().filter(|r| !r.converged).map(|r| r.r).collect();
    Ok(Report {
        result: to_value(&table),
        csv_header: vec!["R", "norm_FinfE", "norm_FEinf", "norm_FinfEinf", "converged", "max_residual"],
        csv_rows: rows,
        plot: Some(plot),
        shortfall: (!stalled.is_empty()).then(|| format!("power iteration did not converge at R = {stalled:?}")),
    })
}

fn lsdelta(cfg: &RunConfig) -> Result<Report, Failure> {
    let a = cfg.first_set()?.materialize()?;
    let est = ls_delta(&a, &grid(cfg)?, &power(cfg))?;
    Ok(Report {
        result: json!({
            "delta": est.norm,
            "iterations": est.iterations,
            "residual": est.residual,
            "converged": est.converged,
        }),
        csv_header: vec!["delta", "iterations", "residual", "converged"],
        csv_rows: vec![vec![
            num(est.norm),
            est.iterations.to_string(),
            num(est.residual),
            est.converged.to_string(),
        ]],
        plot: None,
        shortfall: (!est.converged).then(|| format!("power iteration stopped with residual {:e}", est.residual)),
    })
}

fn schur(cfg: &RunConfig) -> Result<Report, Failure> {
    let e = cfg.first_set()?.materialize()?;
    let f = cfg.second_set()?.materialize()?;
    let g = grid(cfg)?;
    let stack = ScaleStack::for_grid(&g);
    let bump = make_bump()?;
    let steps = (cfg.sample_extent / cfg.sample_step).floor() as i64;
    let pts: Vec<f64> = (-steps..=steps).map(|i| i as f64 * cfg.sample_step).collect();
    let samples = SchurSamples {
        x: pts.clone(),
        y: pts.clone(),
        xi: pts.clone(),
        eta: pts,
    };
    let quad = QuadOptions {
        tol: cfg.tol,
        ..QuadOptions::default()
    };
    let items = schur_integrals(&e, &f, &bump, &stack, &samples, &quad);
    let rows = items
        .iter()
        .map(|it| {
            vec![
                it.item.clone(),
                num(it.sup_estimate),
                opt(it.argsup),
                num(it.quad_tol),
                it.samples.to_string(),
                num(it.quad_error),
                it.converged.to_string(),
            ]
        })
        .collect();
    let stalled: Vec<&str> = items.iter().filter(|i| !i.converged).map(|i| i.item.as_str()).collect();
    Ok(Report {
        result: json!({ "j_max": stack.j_max(), "items": to_value(&items) }),
        csv_header: vec!["item", "sup_estimate", "argsup", "quad_tol", "samples", "quad_error", "converged"],
        csv_rows: rows,
        plot: None,
        shortfall: (!stalled.is_empty()).then(|| format!("quadrature did not converge for items {stalled:?}")),
    })
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

fn decomp(cfg: &RunConfig) -> Result<Report, Failure> {
    let e = cfg.first_set()?.materialize()?;
    let f = cfg.second_set()?.materialize()?;
    let g = grid(cfg)?;
    let inputs: Vec<GridFunction> = (0..3)
        .map(|i| GridFunction::new(g, Side::Space, random_vector(g.n(), cfg.seed + i)))
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &r in cfg.radii_required()? {
        let d = block_decomposition(&e, &f, r, &g)?;
        let mut residual = 0.0f64;
        for v in &inputs {
            residual = residual.max(d.residual(v)?);
        }
        let counts = [
            count(d.near.e_mask()),
            count(d.far_space.e_mask()),
            count(d.near.f_mask()),
            count(d.far_freq.f_mask()),
        ];
        entries.push(json!({
            "R": r,
            "residual": residual,
            "nodes_E_near": counts[0],
            "nodes_E_far": counts[1],
            "freqs_F_near": counts[2],
            "freqs_F_far": counts[3],
            "unresolved_intervals": d.full.unresolved(),
        }));
        let mut row = vec![num(r), num(residual)];
        row.extend(counts.iter().map(|c| c.to_string()));
        rows.push(row);
    }
    Ok(Report {
        result: json!({ "grid": to_value(&g), "entries": entries }),
        csv_header: vec!["R", "residual", "nodes_E_near", "nodes_E_far", "freqs_F_near", "freqs_F_far"],
        csv_rows: rows,
        plot: None,
        shortfall: None,
    })
}

fn scalecheck(cfg: &RunConfig) -> Result<Report, Failure> {
    let a = cfg.first_set()?.materialize()?;
    let g = grid(cfg)?;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &r in cfg.radii_required()? {
        let c = scaling_check(&a, r, &g, &power(cfg))?;
        rows.push(vec![num(r), num(c.norm1), num(c.norm2), num(c.gap), c.identical_masks.to_string()]);
        let mut v = to_value(&c);
        v["R"] = json!(r);
        entries.push(v);
    }
    Ok(Report {
        result: json!({ "entries": entries }),
        csv_header: vec!["R", "norm1", "norm2", "gap", "identical_masks"],
        csv_rows: rows,
        plot: None,
        shortfall: None,
    })
}
