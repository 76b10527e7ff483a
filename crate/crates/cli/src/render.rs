//! Boundary traces as CSV and hand-written SVG figures.

use std::f64::consts::TAU;
use std::fmt::Write;

use charge_sphere::geometry::{project_extended, unproject, ExtendedPoint};
use charge_sphere::nalgebra::{Rotation3, Vector3};
use charge_sphere::region::ExclusionRegion;
use charge_sphere::schwarz::{planar_quadrature_data, spherical_quadrature_data};
use charge_sphere::{ChargeConfig, SpherePoint};
use num_complex::Complex64;

pub const TRACE_POINTS: usize = 512;
const EQUAL_AREA_BANDS: usize = 8;
const SIZE: f64 = 520.0;

/// Everything the figures show: exclusion regions and the charges.
pub struct Scene {
    pub regions: Vec<ExclusionRegion>,
    pub charges: ChargeConfig,
}

struct RegionDrawing {
    /// Boundary in the region's own plane.
    plane: Vec<Complex64>,
    /// Same boundary on the sphere, global coordinates.
    sphere: Vec<Vector3<f64>>,
    planar_nodes: Vec<Vector3<f64>>,
    spherical_nodes: Vec<Vector3<f64>>,
}

impl Scene {
    fn drawings(&self) -> Vec<RegionDrawing> {
        self.regions
            .iter()
            .map(|region| {
                let map = region.planar_map();
                let inverse = region.frame().inverse();
                let lift = |w: Complex64| inverse * unproject(w).to_vector();
                let plane = map.boundary_trace(TRACE_POINTS);
                let nodes = |data: charge_sphere::Result<charge_sphere::schwarz::QuadratureData>| {
                    data.map(|d| d.points.iter().map(|p| lift(p.node)).collect())
                        .unwrap_or_default()
                };
                RegionDrawing {
                    sphere: plane.iter().map(|&w| lift(w)).collect(),
                    planar_nodes: nodes(planar_quadrature_data(&map)),
                    spherical_nodes: nodes(spherical_quadrature_data(&map)),
                    plane,
                }
            })
            .collect()
    }

    /// Frame used for the planar figure and the equal-area circles.
    fn reference_frame(&self) -> Rotation3<f64> {
        self.regions
            .first()
            .map(|r| r.frame())
            .unwrap_or_else(Rotation3::identity)
    }

    fn cap_circles(&self) -> Vec<Vec<Vector3<f64>>> {
        let Ok(caps) = self.charges.caps() else {
            return Vec::new();
        };
        caps.iter()
            .map(|cap| small_circle(&cap.center.to_vector(), cap.angular_radius))
            .collect()
    }

    /// `region,k,u,v,x,y,z`: plane trace in the region's frame and its
    /// stereographic preimage in global coordinates.
    pub fn boundary_csv(&self) -> String {
        let mut out = String::from("region,k,u,v,x,y,z\n");
        for (r, d) in self.drawings().iter().enumerate() {
            for (k, (w, p)) in d.plane.iter().zip(&d.sphere).enumerate() {
                writeln!(out, "{r},{k},{},{},{},{},{}", w.re, w.im, p.x, p.y, p.z).unwrap();
            }
        }
        out
    }

    /// Orthographic view of the sphere seen from direction `view`.
    pub fn sphere_svg(&self, view: &Vector3<f64>) -> String {
        let d = view.normalize();
        let up_hint = if d.z.abs() > 0.99 { Vector3::y() } else { Vector3::z() };
        let up = (up_hint - d * d.dot(&up_hint)).normalize();
        let right = up.cross(&d);
        let radius = 0.42 * SIZE;
        let c = 0.5 * SIZE;
        let screen = |p: &Vector3<f64>| (c + radius * p.dot(&right), c - radius * p.dot(&up));
        let front = |p: &Vector3<f64>| p.dot(&d) >= 0.0;

        let mut svg = header("sphere");
        writeln!(
            svg,
            r#"<circle cx="{c}" cy="{c}" r="{radius}" fill="none" stroke="black" stroke-width="1.2"/>"#
        )
        .unwrap();

        let frame_inverse = self.reference_frame().inverse();
        for k in 1..EQUAL_AREA_BANDS {
            let z = (2 * k) as f64 / EQUAL_AREA_BANDS as f64 - 1.0;
            let ring: Vec<Vector3<f64>> = (0..=180)
                .map(|i| {
                    let t = TAU * i as f64 / 180.0;
                    let s = (1.0 - z * z).sqrt();
                    frame_inverse * Vector3::new(s * t.cos(), s * t.sin(), z)
                })
                .collect();
            sphere_polyline(&mut svg, &ring, &screen, &front, "#888", 0.6, Some("1,3"));
        }
        for circle in self.cap_circles() {
            sphere_polyline(&mut svg, &circle, &screen, &front, "#1f77b4", 1.0, Some("5,3"));
        }
        let drawings = self.drawings();
        for dr in &drawings {
            let mut closed = dr.sphere.clone();
            closed.extend(dr.sphere.first().copied());
            sphere_polyline(&mut svg, &closed, &screen, &front, "#d62728", 2.0, None);
        }
        for q in self.charges.charges() {
            let p = q.position.to_vector();
            let (x, y) = screen(&p);
            let opacity = if front(&p) { 1.0 } else { 0.35 };
            writeln!(
                svg,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black" fill-opacity="{opacity}"/>"#
            )
            .unwrap();
        }
        for dr in &drawings {
            for p in dr.planar_nodes.iter().filter(|p| front(p)) {
                let (x, y) = screen(p);
                diamond(&mut svg, x, y, 5.0);
            }
            for p in dr.spherical_nodes.iter().filter(|p| front(p)) {
                let (x, y) = screen(p);
                asterisk(&mut svg, x, y, 5.0);
            }
        }
        legend(&mut svg);
        svg.push_str("</svg>\n");
        svg
    }

    /// Stereographic plane in the frame of the first region.
    pub fn plane_svg(&self) -> String {
        let frame = self.reference_frame();
        let to_plane = |p: &Vector3<f64>| match SpherePoint::from_direction(frame * p) {
            Ok(sp) => match project_extended(&sp) {
                ExtendedPoint::Finite(w) => Some(w),
                ExtendedPoint::Infinity => None,
            },
            Err(_) => None,
        };
        let drawings = self.drawings();
        let mut extent: f64 = 1.0;
        if let Some(first) = drawings.first() {
            for w in first.sphere.iter().chain(&first.planar_nodes).filter_map(to_plane) {
                extent = extent.max(1.25 * w.norm());
            }
        }
        for q in self.charges.charges() {
            if let Some(w) = to_plane(&q.position.to_vector()) {
                if w.norm() < 3.0 * extent {
                    extent = extent.max(1.1 * w.norm());
                }
            }
        }
        let c = 0.5 * SIZE;
        let scale = 0.45 * SIZE / extent;
        let screen = |w: Complex64| (c + scale * w.re, c - scale * w.im);
        let clip = 4.0 * extent;

        let mut svg = header("plane");
        writeln!(svg, r##"<line x1="0" y1="{c}" x2="{SIZE}" y2="{c}" stroke="#ccc"/><line x1="{c}" y1="0" x2="{c}" y2="{SIZE}" stroke="#ccc"/>"##).unwrap();
        for k in 1..EQUAL_AREA_BANDS {
            let r = (k as f64 / (EQUAL_AREA_BANDS - k) as f64).sqrt();
            writeln!(
                svg,
                r##"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="#888" stroke-width="0.6" stroke-dasharray="1,3"/>"##,
                r * scale
            )
            .unwrap();
        }
        let project_path = |path: &[Vector3<f64>]| -> Vec<Option<Complex64>> {
            path.iter().map(|p| to_plane(p).filter(|w| w.norm() < clip)).collect()
        };
        for circle in self.cap_circles() {
            plane_polyline(&mut svg, &project_path(&circle), &screen, "#1f77b4", 1.0, Some("5,3"));
        }
        for dr in &drawings {
            let mut closed = dr.sphere.clone();
            closed.extend(dr.sphere.first().copied());
            plane_polyline(&mut svg, &project_path(&closed), &screen, "#d62728", 2.0, None);
        }
        for q in self.charges.charges() {
            if let Some(w) = to_plane(&q.position.to_vector()).filter(|w| w.norm() < clip) {
                let (x, y) = screen(w);
                writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#).unwrap();
            }
        }
        for dr in &drawings {
            for w in dr.planar_nodes.iter().filter_map(to_plane).filter(|w| w.norm() < clip) {
                let (x, y) = screen(w);
                diamond(&mut svg, x, y, 5.0);
            }
            for w in dr
                .spherical_nodes
                .iter()
                .filter_map(to_plane)
                .filter(|w| w.norm() < clip)
            {
                let (x, y) = screen(w);
                asterisk(&mut svg, x, y, 5.0);
            }
        }
        legend(&mut svg);
        svg.push_str("</svg>\n");
        svg
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn legend(svg: &mut String) {
    let y = SIZE - 12.0;
    diamond(svg, 14.0, y - 4.0, 5.0);
    writeln!(
        svg,
        r#"<text x="24" y="{y}" font-size="11" font-family="sans-serif">planar nodes</text>"#
    )
    .unwrap();
    asterisk(svg, 114.0, y - 4.0, 5.0);
    writeln!(
        svg,
        r#"<text x="124" y="{y}" font-size="11" font-family="sans-serif">spherical nodes</text>"#
    )
    .unwrap();
}

fn diamond(svg: &mut String, x: f64, y: f64, s: f64) {
    writeln!(
        svg,
        r#"<path d="M{x:.2},{:.2} L{:.2},{y:.2} L{x:.2},{:.2} L{:.2},{y:.2} Z" fill="none" stroke="black" stroke-width="1"/>"#,
        y - s,
        x + s,
        y + s,
        x - s
    )
    .unwrap();
}

fn asterisk(svg: &mut String, x: f64, y: f64, s: f64) {
    let mut d = String::new();
    for k in 0..3 {
        let t = std::f64::consts::PI * k as f64 / 3.0 + std::f64::consts::FRAC_PI_2;
        let (dx, dy) = (s * t.cos(), s * t.sin());
        write!(d, "M{:.2},{:.2} L{:.2},{:.2} ", x - dx, y - dy, x + dx, y + dy).unwrap();
    }
    writeln!(svg, r#"<path d="{}" stroke="black" stroke-width="1"/>"#, d.trim_end()).unwrap();
}

/// Circle of geodesic radius `angle` about the unit vector `center`.
fn small_circle(center: &Vector3<f64>, angle: f64) -> Vec<Vector3<f64>> {
    let helper = if center.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = center.cross(&helper).normalize();
    let v = center.cross(&u);
    (0..=TRACE_POINTS / 2)
        .map(|i| {
            let t = TAU * i as f64 / (TRACE_POINTS / 2) as f64;
            center * angle.cos() + (u * t.cos() + v * t.sin()) * angle.sin()
        })
        .collect()
}

fn path_attrs(color: &str, width: f64, dash: Option<&str>) -> String {
    let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    format!(r#"fill="none" stroke="{color}" stroke-width="{width}"{dash}"#)
}

/// Splits a path on the sphere into front (solid) and back (faint) runs.
fn sphere_polyline(
    svg: &mut String,
    path: &[Vector3<f64>],
    screen: &impl Fn(&Vector3<f64>) -> (f64, f64),
    front: &impl Fn(&Vector3<f64>) -> bool,
    color: &str,
    width: f64,
    dash: Option<&str>,
) {
    let mut start = 0;
    while start < path.len() {
        let side = front(&path[start]);
        let mut end = start;
        while end + 1 < path.len() && front(&path[end + 1]) == side {
            end += 1;
        }
        // Overlap by one point so consecutive runs meet.
        let stop = (end + 1).min(path.len() - 1);
        let points: Vec<(f64, f64)> = path[start..=stop].iter().map(screen).collect();
        let opacity = if side { 1.0 } else { 0.25 };
        write_polyline(
            svg,
            &points,
            &format!(r#"{} stroke-opacity="{opacity}""#, path_attrs(color, width, dash)),
        );
        start = end + 1;
    }
}

/// Draws the finite runs of a projected path.
fn plane_polyline(
    svg: &mut String,
    path: &[Option<Complex64>],
    screen: &impl Fn(Complex64) -> (f64, f64),
    color: &str,
    width: f64,
    dash: Option<&str>,
) {
    for run in path.split(|w| w.is_none()) {
        let points: Vec<(f64, f64)> = run.iter().flatten().map(|&w| screen(w)).collect();
        write_polyline(svg, &points, &path_attrs(color, width, dash));
    }
}

fn write_polyline(svg: &mut String, points: &[(f64, f64)], attrs: &str) {
    if points.len() < 2 {
        return;
    }
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    writeln!(svg, r#"<polyline points="{}" {attrs}/>"#, coords.join(" ")).unwrap();
}
