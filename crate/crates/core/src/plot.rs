//! SVG of the real zero set of a bivariate polynomial by marching squares.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::poly::BiPoly;
use crate::scalar::Real;

/// Axis-aligned plotting box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl PlotBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("plot box needs finite x0 < x1 and y0 < y1"));
        }
        Ok(PlotBox { x0, x1, y0, y1 })
    }
}

/// Segments of `{P = 0}` in the box, from a `grid x grid` cell decomposition.
/// Saddle cells are resolved by the sign at the cell center.
pub fn zero_segments<T: Real>(p: &BiPoly<T>, bx: &PlotBox, grid: usize) -> Result<Vec<[(f64, f64); 2]>> {
    if grid < 2 {
        return Err(Error::invalid("grid must be at least 2"));
    }
    let hx = (bx.x1 - bx.x0) / grid as f64;
    let hy = (bx.y1 - bx.y0) / grid as f64;
    let f = |x: f64, y: f64| p.eval_real(T::lit(x), T::lit(y)).to_f64().unwrap_or(f64::NAN);
    let vals: Vec<Vec<f64>> = (0..=grid)
        .map(|j| (0..=grid).map(|i| f(bx.x0 + i as f64 * hx, bx.y0 + j as f64 * hy)).collect())
        .collect();
    let mut segs = Vec::new();
    for j in 0..grid {
        for i in 0..grid {
            let (x, y) = (bx.x0 + i as f64 * hx, bx.y0 + j as f64 * hy);
            // corners counterclockwise from bottom-left
            let v = [vals[j][i], vals[j][i + 1], vals[j + 1][i + 1], vals[j + 1][i]];
            if v.iter().any(|a| !a.is_finite()) {
                continue;
            }
            let pos = [(x, y), (x + hx, y), (x + hx, y + hy), (x, y + hy)];
            let cross = |a: usize, b: usize| {
                let t = if v[a] == v[b] { 0.5 } else { v[a] / (v[a] - v[b]) };
                (pos[a].0 + t * (pos[b].0 - pos[a].0), pos[a].1 + t * (pos[b].1 - pos[a].1))
            };
            let edges: Vec<usize> = (0..4).filter(|&e| (v[e] > 0.0) != (v[(e + 1) % 4] > 0.0)).collect();
            let pt = |e: usize| cross(e, (e + 1) % 4);
            match edges.len() {
                2 => segs.push([pt(edges[0]), pt(edges[1])]),
                4 => {
                    let center = f(x + hx / 2.0, y + hy / 2.0);
                    if (center > 0.0) == (v[0] > 0.0) {
                        segs.push([pt(0), pt(1)]);
                        segs.push([pt(2), pt(3)]);
                    } else {
                        segs.push([pt(3), pt(0)]);
                        segs.push([pt(1), pt(2)]);
                    }
                }
                _ => {}
            }
        }
    }
    Ok(segs)
}

/// Standalone SVG (500 x 500 px) with axes and the zero set in the box.
pub fn zero_set_svg<T: Real>(p: &BiPoly<T>, bx: &PlotBox, grid: usize) -> Result<String> {
    let segs = zero_segments(p, bx, grid)?;
    let size = 500.0;
    let sx = |x: f64| (x - bx.x0) / (bx.x1 - bx.x0) * size;
    let sy = |y: f64| size - (y - bx.y0) / (bx.y1 - bx.y0) * size;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#).unwrap();
    writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#).unwrap();
    if bx.x0 < 0.0 && bx.x1 > 0.0 {
        writeln!(s, r#"<line x1="{0:.2}" y1="0" x2="{0:.2}" y2="{size}" stroke="gray"/>"#, sx(0.0)).unwrap();
    }
    if bx.y0 < 0.0 && bx.y1 > 0.0 {
        writeln!(s, r#"<line x1="0" y1="{0:.2}" x2="{size}" y2="{0:.2}" stroke="gray"/>"#, sy(0.0)).unwrap();
    }
    let mut d = String::new();
    for [a, b] in &segs {
        write!(d, "M{:.2} {:.2}L{:.2} {:.2}", sx(a.0), sy(a.1), sx(b.0), sy(b.1)).unwrap();
    }
    writeln!(s, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.2"/>"#).unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}
