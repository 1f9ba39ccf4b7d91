//! Image and signal file I/O: PGM (P2/P5), grayscale PNG, and CSV signals.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{PstError, Result};
use crate::transform::{FeatureMap, ImageF};

/// Load a grayscale image. The format is detected from the magic bytes:
/// PGM `P2`/`P5` (8/16-bit, arbitrary declared maxval) or PNG (8/16-bit;
/// color is converted by luma). Integer samples are divided by the declared
/// maximum.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageF> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(PstError::Format(format!(
            "{}: expected PGM (P2/P5) or PNG",
            path.as_ref().display()
        )))
    }
}

/// Save as binary PGM (P5) with maxval `2^depth - 1`. Output is
/// deterministic and byte-exact.
pub fn save_image(image: &ImageF, path: impl AsRef<Path>, depth: u8) -> Result<()> {
    let maxval = depth_maxval(depth)?;
    let quantized = image
        .samples()
        .iter()
        .map(|&v| (v * maxval as f64).round() as u32);
    write_pgm(path, image.width(), image.height(), maxval, quantized)
}

/// Save a feature map as PGM, min-max scaled to the output range. The scale
/// actually used is recorded in a `<path>.scale.txt` sidecar so the mapping
/// stays recoverable.
pub fn save_feature_map(map: &FeatureMap, path: impl AsRef<Path>, depth: u8) -> Result<()> {
    let maxval = depth_maxval(depth)?;
    let (min, max) = map.value_range();
    let span = max - min;
    let quantized = map.values().iter().map(move |&v| {
        if span > 0.0 {
            ((v - min) / span * maxval as f64).round() as u32
        } else {
            0
        }
    });
    write_pgm(&path, map.width(), map.height(), maxval, quantized)?;

    let sidecar = format!("{}.scale.txt", path.as_ref().display());
    let mut file = fs::File::create(sidecar)?;
    writeln!(file, "method {}", map.method().as_str())?;
    writeln!(file, "min {min:.17e}")?;
    writeln!(file, "max {max:.17e}")?;
    Ok(())
}

fn depth_maxval(depth: u8) -> Result<u16> {
    if !(1..=16).contains(&depth) {
        return Err(PstError::InvalidParameter(format!(
            "bit depth must be in 1..=16, got {depth}"
        )));
    }
    Ok(((1u32 << depth) - 1) as u16)
}

fn write_pgm(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    maxval: u16,
    samples: impl Iterator<Item = u32>,
) -> Result<()> {
    let mut bytes = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval > 255 {
        for s in samples {
            let s = s.min(maxval as u32) as u16;
            bytes.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        for s in samples {
            bytes.push(s.min(maxval as u32) as u8);
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Pull whitespace/comment-separated header tokens out of a PGM header.
struct PgmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmTokens<'a> {
    fn next_token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return Err(PstError::CorruptFile("truncated PGM header".into()));
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn next_usize(&mut self) -> Result<usize> {
        let token = self.next_token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PstError::CorruptFile("non-numeric PGM header field".into()))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageF> {
    let binary = bytes.starts_with(b"P5");
    let mut tokens = PgmTokens { bytes, pos: 2 };
    let width = tokens.next_usize()?;
    let height = tokens.next_usize()?;
    let maxval = tokens.next_usize()?;
    if width == 0 || height == 0 {
        return Err(PstError::CorruptFile(format!("degenerate dims {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PstError::CorruptFile(format!("maxval {maxval} out of range")));
    }
    let count = width * height;
    let mut raw = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let raster = &bytes[tokens.pos + 1..];
        if maxval > 255 {
            if raster.len() < 2 * count {
                return Err(PstError::CorruptFile("truncated 16-bit PGM raster".into()));
            }
            for chunk in raster[..2 * count].chunks_exact(2) {
                raw.push(u16::from_be_bytes([chunk[0], chunk[1]]) as usize);
            }
        } else {
            if raster.len() < count {
                return Err(PstError::CorruptFile("truncated 8-bit PGM raster".into()));
            }
            raw.extend(raster[..count].iter().map(|&b| b as usize));
        }
    } else {
        for _ in 0..count {
            raw.push(tokens.next_usize().map_err(|_| {
                PstError::CorruptFile("truncated ASCII PGM raster".into())
            })?);
        }
    }
    if let Some(&bad) = raw.iter().find(|&&s| s > maxval) {
        return Err(PstError::CorruptFile(format!(
            "sample {bad} exceeds declared maxval {maxval}"
        )));
    }
    let samples: Vec<f64> = raw.iter().map(|&s| s as f64 / maxval as f64).collect();
    ImageF::with_max_value(width, height, samples, maxval as u16)
}

fn decode_png(bytes: &[u8]) -> Result<ImageF> {
    let decoded = image::load_from_memory(bytes)
        .map_err(|e| PstError::CorruptFile(format!("PNG decode failed: {e}")))?;
    let sixteen_bit = matches!(
        decoded.color(),
        image::ColorType::L16 | image::ColorType::La16 | image::ColorType::Rgb16 | image::ColorType::Rgba16
    );
    if sixteen_bit {
        let luma = decoded.to_luma16();
        let (w, h) = (luma.width() as usize, luma.height() as usize);
        let samples: Vec<f64> = luma.into_raw().iter().map(|&s| s as f64 / 65535.0).collect();
        ImageF::with_max_value(w, h, samples, 65535)
    } else {
        let luma = decoded.to_luma8();
        let (w, h) = (luma.width() as usize, luma.height() as usize);
        let samples: Vec<f64> = luma.into_raw().iter().map(|&s| s as f64 / 255.0).collect();
        ImageF::with_max_value(w, h, samples, 255)
    }
}

/// Write a 1D signal as CSV, one sample per line with 18 significant digits
/// (round-trip exact).
pub fn write_signal_csv(path: impl AsRef<Path>, signal: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(signal.len() * 26);
    for v in signal {
        out.push_str(&format!("{v:.17e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a 1D signal from CSV. An optional `index,value` header is detected
/// and skipped; for multi-column lines the last field is the sample.
pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut signal = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let field = trimmed.rsplit(',').next().unwrap_or(trimmed).trim();
        match field.parse::<f64>() {
            Ok(v) => signal.push(v),
            Err(_) if idx == 0 => continue, // header line
            Err(_) => {
                return Err(PstError::Parse {
                    line: idx + 1,
                    message: format!("not a number: {trimmed:?}"),
                })
            }
        }
    }
    Ok(signal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::MethodTag;
    use tempfile::tempdir;

    #[test]
    fn pgm_binary_round_trip_is_byte_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let samples: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
        let image = ImageF::new(8, 8, samples).unwrap();
        save_image(&image, &path, 8).unwrap();
        let first = fs::read(&path).unwrap();

        let loaded = load_image(&path).unwrap();
        assert_eq!(loaded.max_value(), 255);
        let path2 = dir.path().join("img2.pgm");
        save_image(&loaded, &path2, 8).unwrap();
        let second = fs::read(&path2).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn pgm_honors_declared_fourteen_bit_maxval() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("hdr.pgm");
        // 2x2, maxval 16383, includes the full-scale sample.
        let bytes = {
            let mut b = b"P5\n2 2\n16383\n".to_vec();
            for s in [0u16, 8191, 16383, 4096] {
                b.extend_from_slice(&s.to_be_bytes());
            }
            b
        };
        fs::write(&path, bytes).unwrap();
        let image = load_image(&path).unwrap();
        assert_eq!(image.max_value(), 16383);
        assert_eq!(image.bit_depth(), 14);
        assert_eq!(image.samples()[2], 1.0);
        assert!((image.samples()[1] - 8191.0 / 16383.0).abs() <= 1e-15);

        // Same-depth save reproduces the byte stream.
        let path2 = dir.path().join("hdr2.pgm");
        save_image(&image, &path2, 14).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn pgm_ascii_with_comments_loads() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ascii.pgm");
        fs::write(&path, b"P2\n# comment\n3 2\n255\n0 128 255\n64 32 16\n").unwrap();
        let image = load_image(&path).unwrap();
        assert_eq!(image.width(), 3);
        assert_eq!(image.height(), 2);
        assert_eq!(image.samples()[2], 1.0);
        assert!((image.samples()[1] - 128.0 / 255.0).abs() <= 1e-15);
    }

    #[test]
    fn truncated_pgm_is_corrupt() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("trunc.pgm");
        fs::write(&path, b"P5\n4 4\n255\n\x00\x01").unwrap();
        assert!(matches!(load_image(&path), Err(PstError::CorruptFile(_))));
    }

    #[test]
    fn unknown_format_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("what.bin");
        fs::write(&path, b"GIF89a....").unwrap();
        assert!(matches!(load_image(&path), Err(PstError::Format(_))));
    }

    #[test]
    fn png_gray_and_color_load_by_luma() {
        let dir = tempdir().unwrap();

        let gray = image::GrayImage::from_fn(4, 3, |x, y| image::Luma([(x * 20 + y) as u8]));
        let gray_path = dir.path().join("gray.png");
        gray.save(&gray_path).unwrap();
        let loaded = load_image(&gray_path).unwrap();
        assert_eq!(loaded.width(), 4);
        assert_eq!(loaded.max_value(), 255);
        assert!((loaded.at(1, 0) - 20.0 / 255.0).abs() <= 1e-15);

        let color = image::RgbImage::from_fn(2, 2, |x, _| image::Rgb([(x * 200) as u8, 0, 0]));
        let color_path = dir.path().join("color.png");
        color.save(&color_path).unwrap();
        let loaded = load_image(&color_path).unwrap();
        assert_eq!(loaded.width(), 2);
        // Luma of pure red is scaled by the red weight, so it is nonzero and
        // below the red channel value.
        assert!(loaded.at(1, 0) > 0.0 && loaded.at(1, 0) < 200.0 / 255.0);

        let gray16 = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_fn(2, 2, |x, y| {
            image::Luma([(x as u16 * 30000) + y as u16])
        });
        let path16 = dir.path().join("gray16.png");
        gray16.save(&path16).unwrap();
        let loaded = load_image(&path16).unwrap();
        assert_eq!(loaded.max_value(), 65535);
        assert!((loaded.at(1, 0) - 30000.0 / 65535.0).abs() <= 1e-15);
    }

    #[test]
    fn feature_map_save_writes_scaling_sidecar() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        let map = FeatureMap::new(2, 2, vec![-0.5, 0.0, 0.25, 1.5], MethodTag::Pst).unwrap();
        save_feature_map(&map, &path, 8).unwrap();
        let sidecar = fs::read_to_string(format!("{}.scale.txt", path.display())).unwrap();
        assert!(sidecar.contains("method pst"));
        assert!(sidecar.contains("min -5.00000000000000000e-1"));
        assert!(sidecar.contains("max 1.50000000000000000e0"));
        let reloaded = load_image(&path).unwrap();
        assert_eq!(reloaded.samples()[0], 0.0);
        assert_eq!(reloaded.samples()[3], 1.0);
    }

    #[test]
    fn all_zero_feature_map_saves_as_zeros() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("zero.pgm");
        let map = FeatureMap::new(3, 1, vec![0.0; 3], MethodTag::Hybrid).unwrap();
        save_feature_map(&map, &path, 8).unwrap();
        let image = load_image(&path).unwrap();
        assert!(image.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("signal.csv");
        let signal = vec![0.1, -2.5e-7, std::f64::consts::PI, 1.0 / 3.0, 0.0];
        write_signal_csv(&path, &signal).unwrap();
        let back = read_signal_csv(&path).unwrap();
        assert_eq!(signal, back);
    }

    #[test]
    fn csv_empty_file_is_empty_signal() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "").unwrap();
        assert!(read_signal_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn csv_header_is_detected_and_skipped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("headered.csv");
        fs::write(&path, "index,value\n0,0.5\n1,0.75\n").unwrap();
        assert_eq!(read_signal_csv(&path).unwrap(), vec![0.5, 0.75]);
    }

    #[test]
    fn csv_bad_line_reports_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "0.5\n0.75\nnot-a-number\n").unwrap();
        match read_signal_csv(&path) {
            Err(PstError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
