//! File codecs for everything that crosses the CLI boundary: JSON schemas
//! for sampled functions, power series, dilatation fields, monotone maps,
//! map jets and welding reports, plus the x,re,im CSV used for plot data.
//! Floats serialize with shortest round-trip formatting, so read, write,
//! read returns bit-identical data.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{DomainTag, PowerSeries};
use crate::beltrami::{BeltramiField, HalfPlaneGrid, MapJet};
use crate::error::{Result, WpcError};
use crate::grid::{CircleGrid, Grid, LineGrid, MonotoneMap, SampledFunction};
use crate::welding::WeldingResult;

fn io_err(path: &Path, source: std::io::Error) -> WpcError {
    WpcError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, message: impl Into<String>) -> WpcError {
    WpcError::Parse { path: path.display().to_string(), message: message.into() }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn from_json<'a, T: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(path, e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("schema types serialize");
    s.push('\n');
    s
}

fn split_complex(values: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (values.iter().map(|v| v.re).collect(), values.iter().map(|v| v.im).collect())
}

fn join_complex(path: &Path, what: &str, re: Vec<f64>, im: Vec<f64>) -> Result<Vec<Complex64>> {
    if re.len() != im.len() {
        return Err(parse_err(
            path,
            format!("{what}: re has {} entries, im has {}", re.len(), im.len()),
        ));
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

#[derive(Serialize, Deserialize)]
struct SampledJson {
    representation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    modulo_constant: bool,
}

impl SampledJson {
    fn from_function(f: &SampledFunction) -> Self {
        let (re, im) = split_complex(&f.values);
        let (representation, half_width) = match &f.grid {
            Grid::Line(g) => ("line".to_string(), Some(g.half_width())),
            Grid::Circle(_) => ("circle".to_string(), None),
        };
        SampledJson {
            representation,
            half_width,
            n: f.values.len(),
            re,
            im,
            modulo_constant: f.modulo_constant,
        }
    }

    fn into_function(self, path: &Path) -> Result<SampledFunction> {
        if self.re.len() != self.n {
            return Err(parse_err(
                path,
                format!("n = {} but re has {} entries", self.n, self.re.len()),
            ));
        }
        let values = join_complex(path, "samples", self.re, self.im)?;
        let grid = match self.representation.as_str() {
            "line" => {
                let hw = self.half_width.ok_or_else(|| {
                    parse_err(path, "line representation requires half_width")
                })?;
                if self.n == 0 {
                    return Err(parse_err(path, "empty sample array"));
                }
                Grid::Line(
                    LineGrid::new(hw, self.n - 1).map_err(|e| parse_err(path, e.to_string()))?,
                )
            }
            "circle" => Grid::Circle(
                CircleGrid::new(self.n).map_err(|e| parse_err(path, e.to_string()))?,
            ),
            other => {
                return Err(parse_err(path, format!("unknown representation \"{other}\"")));
            }
        };
        SampledFunction::new(grid, values, self.modulo_constant)
            .map_err(|e| parse_err(path, e.to_string()))
    }
}

pub fn read_sampled(path: impl AsRef<Path>) -> Result<SampledFunction> {
    let path = path.as_ref();
    let text = read_text(path)?;
    from_json::<SampledJson>(path, &text)?.into_function(path)
}

/// Schema text of a sampled function, as written by `write_sampled`.
pub fn sampled_text(f: &SampledFunction) -> String {
    to_json(&SampledJson::from_function(f))
}

pub fn write_sampled(path: impl AsRef<Path>, f: &SampledFunction) -> Result<()> {
    write_text(path.as_ref(), &sampled_text(f))
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    domain: DomainTag,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn read_series(path: impl AsRef<Path>) -> Result<PowerSeries> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let raw: SeriesJson = from_json(path, &text)?;
    let coefficients = join_complex(path, "coefficients", raw.re, raw.im)?;
    PowerSeries::new(coefficients, raw.domain).map_err(|e| parse_err(path, e.to_string()))
}

pub fn series_text(s: &PowerSeries) -> String {
    let (re, im) = split_complex(&s.coefficients);
    to_json(&SeriesJson { domain: s.domain_tag, re, im })
}

pub fn write_series(path: impl AsRef<Path>, s: &PowerSeries) -> Result<()> {
    write_text(path.as_ref(), &series_text(s))
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    representation: String,
    half_width: f64,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    y_levels: Vec<f64>,
}

pub fn read_field(path: impl AsRef<Path>) -> Result<BeltramiField> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let raw: FieldJson = from_json(path, &text)?;
    if raw.representation != "halfplane" {
        return Err(parse_err(
            path,
            format!("expected representation \"halfplane\", got \"{}\"", raw.representation),
        ));
    }
    if raw.n == 0 {
        return Err(parse_err(path, "empty x node count"));
    }
    let grid = HalfPlaneGrid::from_levels(raw.half_width, raw.n - 1, raw.y_levels)
        .map_err(|e| parse_err(path, e.to_string()))?;
    let values = join_complex(path, "field samples", raw.re, raw.im)?;
    BeltramiField::new(grid, values).map_err(|e| parse_err(path, e.to_string()))
}

pub fn field_text(mu: &BeltramiField) -> String {
    let (re, im) = split_complex(&mu.values);
    to_json(&FieldJson {
        representation: "halfplane".to_string(),
        half_width: mu.grid.x().half_width(),
        n: mu.grid.x().node_count(),
        re,
        im,
        y_levels: mu.grid.y_levels().to_vec(),
    })
}

pub fn write_field(path: impl AsRef<Path>, mu: &BeltramiField) -> Result<()> {
    write_text(path.as_ref(), &field_text(mu))
}

#[derive(Serialize, Deserialize)]
struct MonotoneJson {
    representation: String,
    half_width: f64,
    n: usize,
    values: Vec<f64>,
    tail_slopes: [f64; 2],
}

pub fn read_monotone(path: impl AsRef<Path>) -> Result<MonotoneMap> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let raw: MonotoneJson = from_json(path, &text)?;
    if raw.representation != "monotone" {
        return Err(parse_err(
            path,
            format!("expected representation \"monotone\", got \"{}\"", raw.representation),
        ));
    }
    if raw.values.len() != raw.n || raw.n == 0 {
        return Err(parse_err(
            path,
            format!("n = {} but values has {} entries", raw.n, raw.values.len()),
        ));
    }
    let grid = LineGrid::new(raw.half_width, raw.n - 1).map_err(|e| parse_err(path, e.to_string()))?;
    MonotoneMap::new(grid, raw.values, (raw.tail_slopes[0], raw.tail_slopes[1]))
        .map_err(|e| parse_err(path, e.to_string()))
}

pub fn monotone_text(f: &MonotoneMap) -> String {
    let slopes = f.tail_slopes();
    to_json(&MonotoneJson {
        representation: "monotone".to_string(),
        half_width: f.grid().half_width(),
        n: f.values().len(),
        values: f.values().to_vec(),
        tail_slopes: [slopes.0, slopes.1],
    })
}

pub fn write_monotone(path: impl AsRef<Path>, f: &MonotoneMap) -> Result<()> {
    write_text(path.as_ref(), &monotone_text(f))
}

#[derive(Serialize, Deserialize)]
struct JetJson {
    representation: String,
    half_width: f64,
    n: usize,
    y_levels: Vec<f64>,
    value_re: Vec<f64>,
    value_im: Vec<f64>,
    dz_re: Vec<f64>,
    dz_im: Vec<f64>,
    dzbar_re: Vec<f64>,
    dzbar_im: Vec<f64>,
}

pub fn read_jet(path: impl AsRef<Path>) -> Result<MapJet> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let raw: JetJson = from_json(path, &text)?;
    if raw.representation != "halfplane_jet" {
        return Err(parse_err(
            path,
            format!("expected representation \"halfplane_jet\", got \"{}\"", raw.representation),
        ));
    }
    if raw.n == 0 {
        return Err(parse_err(path, "empty x node count"));
    }
    let grid = HalfPlaneGrid::from_levels(raw.half_width, raw.n - 1, raw.y_levels)
        .map_err(|e| parse_err(path, e.to_string()))?;
    let value = join_complex(path, "jet values", raw.value_re, raw.value_im)?;
    let dz = join_complex(path, "jet dz", raw.dz_re, raw.dz_im)?;
    let dzbar = join_complex(path, "jet dzbar", raw.dzbar_re, raw.dzbar_im)?;
    MapJet::new(grid, value, dz, dzbar).map_err(|e| parse_err(path, e.to_string()))
}

pub fn jet_text(jet: &MapJet) -> String {
    let (value_re, value_im) = split_complex(&jet.value);
    let (dz_re, dz_im) = split_complex(&jet.wirtinger_dz);
    let (dzbar_re, dzbar_im) = split_complex(&jet.wirtinger_dzbar);
    to_json(&JetJson {
        representation: "halfplane_jet".to_string(),
        half_width: jet.grid.x().half_width(),
        n: jet.grid.x().node_count(),
        y_levels: jet.grid.y_levels().to_vec(),
        value_re,
        value_im,
        dz_re,
        dz_im,
        dzbar_re,
        dzbar_im,
    })
}

pub fn write_jet(path: impl AsRef<Path>, jet: &MapJet) -> Result<()> {
    write_text(path.as_ref(), &jet_text(jet))
}

#[derive(Serialize, Deserialize)]
struct WeldingJson {
    log_f_prime: SampledJson,
    log_h_prime: SampledJson,
    residual: f64,
    iterations: usize,
    converged: bool,
}

pub fn read_welding(path: impl AsRef<Path>) -> Result<WeldingResult> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let raw: WeldingJson = from_json(path, &text)?;
    Ok(WeldingResult {
        log_f_prime: raw.log_f_prime.into_function(path)?,
        log_h_prime: raw.log_h_prime.into_function(path)?,
        residual: raw.residual,
        iterations: raw.iterations,
        converged: raw.converged,
    })
}

pub fn welding_text(w: &WeldingResult) -> String {
    to_json(&WeldingJson {
        log_f_prime: SampledJson::from_function(&w.log_f_prime),
        log_h_prime: SampledJson::from_function(&w.log_h_prime),
        residual: w.residual,
        iterations: w.iterations,
        converged: w.converged,
    })
}

pub fn write_welding(path: impl AsRef<Path>, w: &WeldingResult) -> Result<()> {
    write_text(path.as_ref(), &welding_text(w))
}

/// Plot-data CSV with header x,re,im; one row per node. Floats print with
/// shortest round-trip formatting.
pub fn write_curve_csv(
    path: impl AsRef<Path>,
    xs: &[f64],
    values: &[Complex64],
) -> Result<()> {
    let path = path.as_ref();
    if xs.len() != values.len() {
        return Err(WpcError::LengthMismatch { expected: xs.len(), got: values.len() });
    }
    let mut out = String::from("x,re,im\n");
    for (x, v) in xs.iter().zip(values) {
        out.push_str(&format!("{},{},{}\n", x, v.re, v.im));
    }
    write_text(path, &out)
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "x,re,im" {
                return Err(parse_err(path, format!("expected header x,re,im, got \"{line}\"")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| parse_err(path, format!("line {}: missing {name}", lineno + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(path, format!("line {}: {name}: {e}", lineno + 1)))
        };
        let x = next("x")?;
        let re = next("re")?;
        let im = next("im")?;
        xs.push(x);
        values.push(Complex64::new(re, im));
    }
    Ok((xs, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DomainTag;
    use tempfile::tempdir;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bits(values: &[Complex64]) -> Vec<(u64, u64)> {
        values.iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect()
    }

    #[test]
    fn sampled_line_round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let g = LineGrid::new(4.0, 16).unwrap();
        let f = SampledFunction::sample_line(g, |x| c(x.sin() * 0.1, x * 1e-3), true);
        let p1 = dir.path().join("u.json");
        let p2 = dir.path().join("u2.json");
        write_sampled(&p1, &f).unwrap();
        let r1 = read_sampled(&p1).unwrap();
        write_sampled(&p2, &r1).unwrap();
        let r2 = read_sampled(&p2).unwrap();
        assert_eq!(bits(&r1.values), bits(&r2.values));
        assert_eq!(r1.grid, r2.grid);
        assert_eq!(bits(&f.values), bits(&r1.values));
        assert!(r1.modulo_constant);
    }

    #[test]
    fn sampled_circle_round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let g = CircleGrid::new(32).unwrap();
        let f = SampledFunction::sample_circle(g, |t| c((3.0 * t).cos(), 0.1), false);
        let p = dir.path().join("c.json");
        write_sampled(&p, &f).unwrap();
        let r = read_sampled(&p).unwrap();
        assert_eq!(bits(&f.values), bits(&r.values));
        assert_eq!(f.grid, r.grid);
    }

    #[test]
    fn handwritten_decimal_samples_survive_the_round_trip() {
        let dir = tempdir().unwrap();
        let p1 = dir.path().join("hand.json");
        let p2 = dir.path().join("copy.json");
        let n = 17;
        let re: Vec<String> = (0..n).map(|i| format!("{}", 0.1 * i as f64)).collect();
        std::fs::write(
            &p1,
            format!(
                "{{\"representation\":\"line\",\"half_width\":2.0,\"n\":{n},\"re\":[{}],\"im\":[{}],\"modulo_constant\":false}}",
                re.join(","),
                vec!["1e-3"; n].join(",")
            ),
        )
        .unwrap();
        let r1 = read_sampled(&p1).unwrap();
        write_sampled(&p2, &r1).unwrap();
        let r2 = read_sampled(&p2).unwrap();
        assert_eq!(bits(&r1.values), bits(&r2.values));
    }

    #[test]
    fn series_round_trip_keeps_domain_and_bits() {
        let dir = tempdir().unwrap();
        let s = PowerSeries::new(
            vec![c(0.0, 0.0), c(1.0, 0.0), c(-0.3, 0.7), c(1e-15, -2.5)],
            DomainTag::HalfplaneViaCayley,
        )
        .unwrap();
        let p = dir.path().join("s.json");
        write_series(&p, &s).unwrap();
        let r = read_series(&p).unwrap();
        assert_eq!(r.domain_tag, DomainTag::HalfplaneViaCayley);
        assert_eq!(bits(&s.coefficients), bits(&r.coefficients));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("halfplane_via_cayley"));
    }

    #[test]
    fn field_round_trip_keeps_grid_and_bits() {
        let dir = tempdir().unwrap();
        let g = HalfPlaneGrid::new(2.0, 16, 0.05, 4.0, 12).unwrap();
        let mu = BeltramiField::from_fn(g, |x, y| c(0.1 * x / (1.0 + y), 0.05)).unwrap();
        let p = dir.path().join("mu.json");
        write_field(&p, &mu).unwrap();
        let r = read_field(&p).unwrap();
        assert_eq!(mu.grid, r.grid);
        assert_eq!(bits(&mu.values), bits(&r.values));
    }

    #[test]
    fn field_rejects_out_of_bound_samples() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("bad.json");
        let g = HalfPlaneGrid::new(2.0, 16, 0.05, 4.0, 3).unwrap();
        let mut mu = BeltramiField::zero(g);
        mu.values[0] = c(0.5, 0.0);
        write_field(&p, &mu).unwrap();
        let text = std::fs::read_to_string(&p).unwrap().replace("0.5", "1.5");
        std::fs::write(&p, text).unwrap();
        match read_field(&p) {
            Err(WpcError::Parse { message, .. }) => {
                assert!(message.contains("unit bound"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn monotone_round_trip_preserves_tails() {
        let dir = tempdir().unwrap();
        let g = LineGrid::new(3.0, 16);
        let values: Vec<f64> = (0..17).map(|i| -3.0 + 0.375 * i as f64 + 0.01 * (i as f64).sin()).collect();
        let f = MonotoneMap::new(g.unwrap(), values, (0.9, 1.1)).unwrap();
        let p = dir.path().join("f.json");
        write_monotone(&p, &f).unwrap();
        let r = read_monotone(&p).unwrap();
        assert_eq!(f.tail_slopes(), r.tail_slopes());
        assert_eq!(f.values(), r.values());
        assert_eq!(f.grid(), r.grid());
    }

    #[test]
    fn jet_round_trip_preserves_all_three_arrays() {
        let dir = tempdir().unwrap();
        let g = HalfPlaneGrid::new(2.0, 16, 0.1, 1.0, 4).unwrap();
        let n = g.len();
        let value: Vec<Complex64> = (0..n).map(|i| c(i as f64 * 0.1, 1.0)).collect();
        let dz = vec![c(1.0, 0.0); n];
        let dzbar: Vec<Complex64> = (0..n).map(|i| c(0.001 * i as f64, 0.0)).collect();
        let jet = MapJet::new(g, value, dz, dzbar).unwrap();
        let p = dir.path().join("jet.json");
        write_jet(&p, &jet).unwrap();
        let r = read_jet(&p).unwrap();
        assert_eq!(bits(&jet.value), bits(&r.value));
        assert_eq!(bits(&jet.wirtinger_dz), bits(&r.wirtinger_dz));
        assert_eq!(bits(&jet.wirtinger_dzbar), bits(&r.wirtinger_dzbar));
    }

    #[test]
    fn welding_report_round_trips() {
        let dir = tempdir().unwrap();
        let g = LineGrid::new(4.0, 16).unwrap();
        let f = SampledFunction::sample_line(g, |x| c(0.01 * x, -0.02), false);
        let w = WeldingResult {
            log_f_prime: f.clone(),
            log_h_prime: f,
            residual: 3.5e-9,
            iterations: 12,
            converged: true,
        };
        let p = dir.path().join("w.json");
        write_welding(&p, &w).unwrap();
        let r = read_welding(&p).unwrap();
        assert_eq!(r.iterations, 12);
        assert!(r.converged);
        assert_eq!(r.residual.to_bits(), w.residual.to_bits());
        assert_eq!(bits(&w.log_f_prime.values), bits(&r.log_f_prime.values));
    }

    #[test]
    fn curve_csv_round_trips() {
        let dir = tempdir().unwrap();
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let vs: Vec<Complex64> = xs.iter().map(|&x| c(x.cos(), x.sin() * 1e-4)).collect();
        let p = dir.path().join("curve.csv");
        write_curve_csv(&p, &xs, &vs).unwrap();
        let (xs2, vs2) = read_curve_csv(&p).unwrap();
        assert_eq!(
            xs.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            xs2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(bits(&vs), bits(&vs2));
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = read_sampled("/nonexistent/u.json").unwrap_err();
        assert!(matches!(err, WpcError::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/u.json"));
    }

    #[test]
    fn malformed_json_reports_the_path() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("broken.json");
        std::fs::write(&p, "{\"representation\": \"line\",").unwrap();
        let err = read_sampled(&p).unwrap_err();
        assert!(matches!(err, WpcError::Parse { .. }));
        assert!(err.to_string().contains("broken.json"));
    }

    #[test]
    fn unknown_representation_is_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("odd.json");
        std::fs::write(
            &p,
            "{\"representation\":\"torus\",\"n\":2,\"re\":[0,0],\"im\":[0,0],\"modulo_constant\":false}",
        )
        .unwrap();
        let err = read_sampled(&p).unwrap_err();
        assert!(err.to_string().contains("torus"), "{err}");
    }
}
