//! Deterministic text encodings: fixed 17-significant-digit floats, `\n`
//! line endings.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use cartesian_lens::Point2;

/// `{:.16e}`, or `NaN` / `inf` / `-inf`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// Pretty JSON whose floats use the same fixed format as the CSV output.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(num(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats(PrettyFormatter::new()));
    // in-memory writes of plain data cannot fail
    value.serialize(&mut ser).expect("serializable value");
    out.push(b'\n');
    out
}

/// Standalone SVG 1.1 with one polyline per curve and a marker per focus.
/// The y axis is flipped so the plot reads like the usual x-y plane.
pub fn svg(curves: &[Vec<Point2>], foci: &[Point2]) -> Vec<u8> {
    let all = curves.iter().flatten().chain(foci.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all.filter(|p| p.is_finite()) {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(-p.y);
        y1 = y1.max(-p.y);
    }
    if !(x0 <= x1) {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let margin = 0.05 * span;
    let (vx, vy, vw, vh) = (x0 - margin, y0 - margin, x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let stroke = span / 400.0;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{vx:.6} {vy:.6} {vw:.6} {vh:.6}\" width=\"800\" height=\"{:.0}\">",
        800.0 * vh / vw
    );
    for curve in curves {
        let pts: Vec<String> =
            curve.iter().filter(|p| p.is_finite()).map(|p| format!("{:.6},{:.6}", p.x, -p.y)).collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.6}\" points=\"{}\"/>",
            pts.join(" ")
        );
    }
    for f in foci {
        let _ = writeln!(s, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"red\"/>", f.x, -f.y, 3.0 * stroke);
    }
    s.push_str("</svg>\n");
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn json_floats_are_fixed() {
        #[derive(Serialize)]
        struct T {
            a: f64,
            k: usize,
        }
        let s = String::from_utf8(json(&T { a: 4.0, k: 3 })).unwrap();
        assert_eq!(s, "{\n  \"a\": 4.0000000000000000e0,\n  \"k\": 3\n}\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], 4.0);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = String::from_utf8(svg(&[vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)]], &[Point2::new(0.5, 0.0)]))
            .unwrap();
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("viewBox=\"-0.050000 -1.050000 1.100000 1.100000\""));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
