//! File formats: record matrices as CSV or flat little-endian binary,
//! detector traces as CSV, and grayscale images as plain-text matrices or
//! portable graymaps (P2/P5, up to 16 bit).

use std::fs;
use std::io::Read;
#[cfg(test)]
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use eitlab::record::SpinwaveRecord;

use crate::error::CliError;

/// Record matrix CSV: header row carries ξ, the first column carries t.
pub fn write_record_csv(path: &Path, record: &SpinwaveRecord) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("t_us");
    for xi in &record.xi {
        out.push(',');
        out.push_str(&format!("{xi}"));
    }
    out.push('\n');
    for i in 0..record.n_frames() {
        out.push_str(&format!("{}", record.times[i]));
        for v in record.frame(i) {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(&path.display().to_string(), e))
}

/// Read a record matrix CSV back into (times, xi, s_mag).
pub fn read_record_csv(path: &Path) -> Result<SpinwaveRecord, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty record file", path.display())))?;
    let mut xi = Vec::new();
    for (k, field) in header.split(',').enumerate() {
        if k == 0 {
            continue;
        }
        xi.push(parse_f64(path, field)?);
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        times.push(parse_f64(path, fields.next().unwrap())?);
        let mut count = 0;
        for field in fields {
            values.push(parse_f64(path, field)?);
            count += 1;
        }
        if count != xi.len() {
            return Err(CliError::Config(format!(
                "{}: row has {count} values, header has {}",
                path.display(),
                xi.len()
            )));
        }
    }
    let s_mag = Array2::from_shape_vec((times.len(), xi.len()), values)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(SpinwaveRecord {
        s_mag,
        times,
        xi,
        detector_times: vec![],
        out_forward: vec![],
        out_backward: vec![],
        normalization: 1.0,
        zero_signal: false,
    })
}

/// Flat binary record: u64 LE row/column counts, then times, ξ, and the
/// row-major matrix as little-endian f64.
pub fn write_record_binary(path: &Path, record: &SpinwaveRecord) -> Result<(), CliError> {
    let mut out = Vec::with_capacity(16 + 8 * (record.n_frames() * (record.n_xi() + 1)));
    out.extend_from_slice(&(record.n_frames() as u64).to_le_bytes());
    out.extend_from_slice(&(record.n_xi() as u64).to_le_bytes());
    for &t in &record.times {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for &x in &record.xi {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for v in record.s_mag.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| CliError::io(&path.display().to_string(), e))
}

pub fn read_record_binary(path: &Path) -> Result<SpinwaveRecord, CliError> {
    let mut file =
        fs::File::open(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| CliError::io(&path.display().to_string(), e))?;
    let fail = || CliError::Config(format!("{}: truncated binary record", path.display()));
    if bytes.len() < 16 {
        return Err(fail());
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let need = 16 + 8 * (rows + cols + rows * cols);
    if bytes.len() != need {
        return Err(fail());
    }
    let mut cursor = 16;
    let mut take = |n: usize| {
        let out: Vec<f64> = bytes[cursor..cursor + 8 * n]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        cursor += 8 * n;
        out
    };
    let times = take(rows);
    let xi = take(cols);
    let values = take(rows * cols);
    let s_mag = Array2::from_shape_vec((rows, cols), values).expect("sized above");
    Ok(SpinwaveRecord {
        s_mag,
        times,
        xi,
        detector_times: vec![],
        out_forward: vec![],
        out_backward: vec![],
        normalization: 1.0,
        zero_signal: false,
    })
}

/// Dispatch on extension: `.bin` binary, anything else CSV.
pub fn read_record(path: &Path) -> Result<SpinwaveRecord, CliError> {
    if path.extension().is_some_and(|e| e == "bin") {
        read_record_binary(path)
    } else {
        read_record_csv(path)
    }
}

pub fn write_detectors_csv(path: &Path, record: &SpinwaveRecord) -> Result<(), CliError> {
    let mut out = String::from("t_us,e_fwd_re,e_fwd_im,e_fwd_abs,e_bwd_re,e_bwd_im,e_bwd_abs\n");
    for (k, &t) in record.detector_times.iter().enumerate() {
        let f: Complex64 = record.out_forward[k];
        let b: Complex64 = record.out_backward[k];
        out.push_str(&format!(
            "{t},{},{},{},{},{},{}\n",
            f.re,
            f.im,
            f.norm(),
            b.re,
            b.im,
            b.norm()
        ));
    }
    fs::write(path, out).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn parse_f64(path: &Path, field: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("{}: bad number '{field}'", path.display())))
}

/// Read an image as a grayscale matrix: PGM (P2 ascii or P5 binary,
/// maxval ≤ 65535 with 16-bit samples big-endian) by magic number, plain
/// whitespace-separated text otherwise.
pub fn read_image(path: &Path) -> Result<Array2<f64>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        read_pgm(path, &bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Config(format!("{}: not text or PGM", path.display())))?;
        read_text_matrix(path, &text)
    }
}

fn read_text_matrix(path: &Path, text: &str) -> Result<Array2<f64>, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split_whitespace()
            .map(|f| parse_f64(path, f))
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!(
            "{}: empty matrix",
            path.display()
        )));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Config(format!(
            "{}: ragged matrix rows",
            path.display()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let n_rows = flat.len() / cols;
    Ok(Array2::from_shape_vec((n_rows, cols), flat).expect("shape checked"))
}

fn read_pgm(path: &Path, bytes: &[u8]) -> Result<Array2<f64>, CliError> {
    let bad = |what: &str| CliError::Config(format!("{}: {what}", path.display()));
    let binary = bytes.starts_with(b"P5");
    // Header tokens: magic, width, height, maxval; comments start with '#'.
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 && pos < bytes.len() {
        let b = bytes[pos];
        if b == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
    }
    if tokens.len() < 4 {
        return Err(bad("truncated PGM header"));
    }
    let width: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    let maxval: u32 = tokens[3].parse().map_err(|_| bad("bad maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("unsupported maxval"));
    }
    let mut values = Vec::with_capacity(width * height);
    if binary {
        pos += 1; // single whitespace after maxval
        if maxval < 256 {
            if bytes.len() < pos + width * height {
                return Err(bad("truncated P5 payload"));
            }
            values.extend(bytes[pos..pos + width * height].iter().map(|&b| b as f64));
        } else {
            if bytes.len() < pos + 2 * width * height {
                return Err(bad("truncated P5 payload"));
            }
            values.extend(
                bytes[pos..pos + 2 * width * height]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64),
            );
        }
    } else {
        let text = String::from_utf8_lossy(&bytes[pos..]);
        for token in text.split_whitespace().take(width * height) {
            values.push(token.parse::<f64>().map_err(|_| bad("bad P2 sample"))?);
        }
        if values.len() != width * height {
            return Err(bad("truncated P2 payload"));
        }
    }
    Ok(Array2::from_shape_vec((height, width), values).expect("sized above"))
}

/// Write a 16-bit P5 graymap (test support for the reader).
#[cfg(test)]
pub fn write_pgm16(path: &Path, image: &Array2<f64>, maxval: u16) -> Result<(), CliError> {
    let mut out = format!("P5\n{} {}\n{}\n", image.ncols(), image.nrows(), maxval).into_bytes();
    for v in image.iter() {
        let q = v.clamp(0.0, maxval as f64).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    let mut file =
        fs::File::create(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    file.write_all(&out)
        .map_err(|e| CliError::io(&path.display().to_string(), e))
}
