use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dtb_core::dtb::{chebyshev_derivative, dtb_from_reference, finite_difference_derivative, rom_factor};
use dtb_core::forward::{
    born_oracle, sensor_vectors, simulate, snapshots, DataSet, FineModel, Medium, Propagator, DEFAULT_FD_STEP,
};
use dtb_core::gram::GramPair;
use dtb_core::inversion::{
    dilate, impedance_estimates, mimo_impedance_report, off_mask_energy_fraction, peak_distance, rtm_image, Image,
    TravelTimeMethod,
};
use dtb_core::linalg::{BlockMatrix, DenseMatrix};
use dtb_core::{mimo_rom, siso_rom};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::container;
use crate::error::{CliError, Result};

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON number, or a string tag for values JSON cannot represent.
fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn matrix_json(m: &DenseMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|&v| number(v)).collect())).collect())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    container::write_atomic(path, text.as_bytes())
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_text(path, &text)
}

fn sibling(path: &Path, extension: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".{extension}"));
    path.with_file_name(name)
}

fn rom_order(n: Option<usize>, config: Option<&RunConfig>, data: &DataSet) -> usize {
    n.or(config.map(|c| c.n)).unwrap_or(data.two_n() / 2)
}

fn reference_data(config: &RunConfig, data: &DataSet) -> Result<DataSet> {
    let reference = config.reference()?;
    if reference.sensor_count() != data.m() {
        return Err(CliError::validation(
            "reference",
            format!("medium has {} sensors, data have {}", reference.sensor_count(), data.m()),
        ));
    }
    Ok(simulate(&reference, &config.pulse()?, data.tau(), data.two_n(), config.solver())?)
}

pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<DataSet> {
    let data = simulate(&config.medium()?, &config.pulse()?, config.tau, 2 * config.n, config.solver())?;
    container::write(out, &data)?;
    Ok(data)
}

pub fn cmd_rom(data_path: &Path, n: Option<usize>, mimo: bool, out: &Path) -> Result<Value> {
    let data = container::read(data_path)?;
    let n = rom_order(n, None, &data);
    let report = if data.m() == 1 && !mimo {
        let rom = siso_rom::build_rom(&data, n)?;
        let fit = siso_rom::rom_data(&rom, 2 * n)?;
        let factor = siso_rom::factorize(&rom)?;
        let p = &rom.p_tilde;
        json!({
            "kind": "siso",
            "n": n,
            "tau": data.tau(),
            "data_match_residual": number(fit.relative_distance(&data.truncated(2 * n)?)?),
            "offband_before_zeroing": number(rom.offband),
            "p_tilde_diagonal": (0..n).map(|j| number(p[(j, j)])).collect::<Vec<_>>(),
            "p_tilde_offdiagonal": (1..n).map(|j| number(p[(j, j - 1)])).collect::<Vec<_>>(),
            "gamma": factor.gammas.iter().map(|&v| number(v)).collect::<Vec<_>>(),
            "gamma_hat": factor.gamma_hats.iter().map(|&v| number(v)).collect::<Vec<_>>(),
        })
    } else {
        let rom = mimo_rom::build_rom(&data, n)?;
        let fit = mimo_rom::rom_data(&rom, 2 * n)?;
        let factor = mimo_rom::consistent_factor(&rom)?;
        let band =
            |b: &BlockMatrix, off: usize| (off..n).map(|j| matrix_json(&b.block(j, j - off))).collect::<Vec<_>>();
        json!({
            "kind": "mimo",
            "n": n,
            "m": data.m(),
            "tau": data.tau(),
            "data_match_residual": number(fit.relative_distance(&data.truncated(2 * n)?)?),
            "offband_before_zeroing": number(rom.offband),
            "factor_residual": number(mimo_rom::factor_residual(&rom, &factor)),
            "p_tilde_diagonal_blocks": band(&rom.p_tilde, 0),
            "p_tilde_subdiagonal_blocks": band(&rom.p_tilde, 1),
            "gamma": factor.gammas.iter().map(matrix_json).collect::<Vec<_>>(),
            "gamma_hat": factor.gamma_hats.iter().map(matrix_json).collect::<Vec<_>>(),
            "q": factor.q_blocks.iter().map(matrix_json).collect::<Vec<_>>(),
        })
    };
    write_json(out, &report)?;
    Ok(report)
}

pub fn traces_csv(measured: &DataSet, transformed: &DataSet, reference: &DataSet) -> String {
    let mut s = String::from("k,t,receiver,source,measured,dtb,reference\n");
    for k in 0..transformed.two_n() {
        let t = k as f64 * transformed.tau();
        for r in 0..transformed.m() {
            for src in 0..transformed.m() {
                let _ = writeln!(
                    s,
                    "{k},{},{r},{src},{},{},{}",
                    fmt17(t),
                    fmt17(measured.frame(k)[(r, src)]),
                    fmt17(transformed.frame(k)[(r, src)]),
                    fmt17(reference.frame(k)[(r, src)])
                );
            }
        }
    }
    s
}

pub fn cmd_dtb(data_path: &Path, config: &RunConfig, n: Option<usize>, out: &Path) -> Result<Value> {
    let data = container::read(data_path)?;
    let n = rom_order(n, Some(config), &data);
    let d0 = reference_data(config, &data)?;
    let result = dtb_from_reference(&data, &d0, n)?;
    container::write(out, &result.frames)?;
    let measured = data.truncated(2 * n)?;
    write_text(&sibling(out, "csv"), &traces_csv(&measured, &result.frames, &result.reference))?;
    let summary = json!({
        "n": n,
        "m": data.m(),
        "tau": data.tau(),
        "frames": result.frames.two_n(),
        "max_abs_correction": number(result.derivative.iter().fold(0.0f64, |a, d| a.max(d.max_abs()))),
        "xi_form_discrepancy": number(result.xi_form_discrepancy),
    });
    write_json(&sibling(out, "json"), &summary)?;
    Ok(summary)
}

pub fn cmd_invert(data_path: &Path, config: &RunConfig, n: Option<usize>, mimo: bool, out: &Path) -> Result<Value> {
    let data = container::read(data_path)?;
    let n = rom_order(n, Some(config), &data);
    let d0 = reference_data(config, &data)?;
    if data.m() == 1 && !mimo {
        let f = siso_rom::factorize(&siso_rom::build_rom(&data, n)?)?;
        let f0 = siso_rom::factorize(&siso_rom::build_rom(&d0, n)?)?;
        let est = impedance_estimates(&f, &f0)?;
        let mut s = String::from("j,T,sigma,T_hat,sigma_hat\n");
        for j in 0..n {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                j + 1,
                fmt17(est.primary_nodes[j]),
                fmt17(est.primary_values[j]),
                fmt17(est.dual_nodes[j]),
                fmt17(est.dual_values[j])
            );
        }
        write_text(out, &s)?;
        Ok(json!({ "kind": "siso", "n": n }))
    } else {
        let f = mimo_rom::consistent_factor(&mimo_rom::build_rom(&data, n)?)?;
        let f0 = mimo_rom::consistent_factor(&mimo_rom::build_rom(&d0, n)?)?;
        let report = mimo_impedance_report(&f, &f0)?;
        let value = json!({
            "kind": "mimo",
            "experimental": true,
            "n": n,
            "primary": report.primary.iter().map(matrix_json).collect::<Vec<_>>(),
            "dual": report.dual.iter().map(matrix_json).collect::<Vec<_>>(),
        });
        write_json(out, &value)?;
        Ok(json!({ "kind": "mimo", "n": n }))
    }
}

pub fn image_csv(image: &Image) -> String {
    let mut s = String::new();
    for j in 0..image.ny {
        let row: Vec<String> = (0..image.nx).map(|i| fmt17(image.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_image(data_path: &Path, config: &RunConfig, out: &Path) -> Result<Value> {
    let data = container::read(data_path)?;
    let Medium::TwoD(reference) = config.reference()? else {
        return Err(CliError::validation("medium.kind", "imaging needs a 2d medium"));
    };
    let d0 = reference_data(config, &data)?;
    let image = rtm_image(&data.difference(&d0)?, &reference, TravelTimeMethod::Auto)?;
    write_text(out, &image_csv(&image))?;

    let (nx, ny) = (image.nx, image.ny);
    let mute = config.mute_rows();
    let region: Vec<bool> = (0..nx * ny).map(|k| k / nx >= mute).collect();
    let muted =
        Image { nx, ny, values: image.values.iter().zip(&region).map(|(&v, &r)| if r { v } else { 0.0 }).collect() };
    let mut report = json!({
        "nx": nx,
        "ny": ny,
        "mute_rows": mute,
        "energy": number(image.values.iter().map(|v| v * v).sum()),
    });
    if let Some(support) = config.support().filter(|s| s.iter().any(|&v| v)) {
        let mask = dilate(&support, nx, ny, 3);
        report["off_mask_energy_fraction"] = number(off_mask_energy_fraction(&muted, &mask));
        report["off_mask_energy_fraction_unmuted"] = number(off_mask_energy_fraction(&image, &mask));
        report["peak_distance_cells"] = number(peak_distance(&image, &support, Some(&region)));
    }
    write_json(&sibling(out, "json"), &report)?;
    Ok(report)
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn gram_oracle(medium: &Medium, config: &RunConfig, data: &DataSet, n: usize) -> Result<f64> {
    let model = FineModel::new(medium)?;
    let b = sensor_vectors(model.operator(), model.deltas(), &config.pulse()?)?;
    let gram = GramPair::from_data(data, n)?;
    let snaps = snapshots(model.operator(), &b, config.tau, n)?;
    let m = b.cols();
    let mut p = DenseMatrix::zeros(b.rows(), n * m);
    for (k, s) in snaps.iter().enumerate() {
        p.set_submatrix(0, k * m, s);
    }
    let prop = Propagator::new(model.operator(), config.tau)?;
    let mass = p.t_matmul(&p);
    let stiff = p.t_matmul(&prop.apply(&p));
    let e_mass = gram.mass.dense().sub(&mass).max_abs() / mass.max_abs();
    let e_stiff = gram.stiff.dense().sub(&stiff).max_abs() / stiff.max_abs();
    Ok(e_mass.max(e_stiff))
}

/// Runs the invariant checks on the configured medium and returns the JSON
/// report together with the number of failed checks.
pub fn cmd_verify(config: &RunConfig) -> Result<(Value, usize)> {
    let start = Instant::now();
    let medium = config.medium()?;
    let reference = config.reference()?;
    let pulse = config.pulse()?;
    let n = config.n;
    let data = simulate(&medium, &pulse, config.tau, 2 * n, config.solver())?;
    let d0 = simulate(&reference, &pulse, config.tau, 2 * n, config.solver())?;
    let m = data.m();
    let mut checks = Vec::new();
    let mut diagnostics = serde_json::Map::new();

    checks.push(Check { name: "gram_oracle", value: gram_oracle(&medium, config, &data, n)?, tolerance: 1e-10 });
    if m == 1 {
        let rom = siso_rom::build_rom(&data, n)?;
        let fit = siso_rom::rom_data(&rom, 2 * n)?;
        let residual = fit.difference(&data)?.max_abs() / data.frame(0)[(0, 0)].abs();
        checks.push(Check { name: "data_match", value: residual, tolerance: 1e-8 });
        checks.push(Check { name: "tridiagonality", value: rom.offband, tolerance: 1e-9 });
    } else {
        let rom = mimo_rom::build_rom(&data, n)?;
        let fit = mimo_rom::rom_data(&rom, 2 * n)?;
        checks.push(Check { name: "data_match", value: fit.relative_distance(&data)?, tolerance: 1e-6 });
        checks.push(Check { name: "tridiagonality", value: rom.offband, tolerance: 1e-6 });
        let factor = mimo_rom::consistent_factor(&rom)?;
        checks.push(Check {
            name: "factor_consistency",
            value: mimo_rom::factor_residual(&rom, &factor),
            tolerance: 1e-6,
        });
    }

    let l_q = rom_factor(&data, n)?;
    let l_q0 = rom_factor(&d0, n)?;
    let chain = chebyshev_derivative(&l_q, &l_q0, config.tau, 2 * n, m)?;
    let fd = finite_difference_derivative(&l_q, &l_q0, config.tau, 2 * n, m, 1e-6)?;
    let scale = fd.iter().fold(0.0f64, |a, f| a.max(f.max_abs())).max(f64::MIN_POSITIVE);
    let fd_error = chain.frames.iter().zip(&fd).fold(0.0f64, |a, (c, f)| a.max(c.sub(f).max_abs())) / scale;
    checks.push(Check { name: "chain_rule_vs_finite_difference", value: fd_error, tolerance: 1e-5 });

    let fixed = dtb_from_reference(&d0, &d0, n)?.frames.relative_distance(&d0)?;
    checks.push(Check { name: "reference_fixed_point", value: fixed, tolerance: 1e-10 });

    let out = dtb_from_reference(&data, &d0, n)?;
    diagnostics.insert("xi_form_discrepancy".into(), number(out.xi_form_discrepancy));
    match born_oracle(&reference, &medium, &pulse, config.tau, 2 * n, DEFAULT_FD_STEP) {
        Ok(born) => {
            let born_error = out.frames.difference(&born)?.max_abs() / born.max_abs();
            let raw_error = data.difference(&born)?.max_abs() / born.max_abs();
            if m == 1 {
                checks.push(Check { name: "dtb_vs_born", value: born_error, tolerance: 0.05 });
            } else {
                diagnostics.insert("dtb_vs_born".into(), number(born_error));
            }
            diagnostics.insert("raw_vs_born".into(), number(raw_error));
        }
        Err(e) if m > 1 => {
            diagnostics.insert("dtb_vs_born".into(), json!(format!("not applicable: {e}")));
        }
        Err(e) => return Err(e.into()),
    }

    let failed = checks.iter().filter(|c| !c.passed()).count();
    let report = json!({
        "seed": config.seed,
        "n": n,
        "m": m,
        "tau": config.tau,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "value": number(c.value),
            "tolerance": c.tolerance,
            "pass": c.passed(),
        })).collect::<Vec<_>>(),
        "diagnostics": diagnostics,
        "all_passed": failed == 0,
        "elapsed_seconds": start.elapsed().as_secs_f64(),
    });
    Ok((report, failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, std::f64::consts::E] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn non_finite_values_become_tags() {
        assert_eq!(number(f64::INFINITY), json!("inf"));
        assert_eq!(number(f64::NAN), json!("nan"));
        assert_eq!(number(1.5), json!(1.5));
    }

    #[test]
    fn sibling_appends_an_extension() {
        assert_eq!(sibling(Path::new("/tmp/out.dtbd"), "csv"), PathBuf::from("/tmp/out.dtbd.csv"));
    }
}
