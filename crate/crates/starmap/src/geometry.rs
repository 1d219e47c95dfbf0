//! Closed-form tradeoff surfaces over the storage-computation plane.
//!
//! For each scheme parameter `i` there are two corner quadruples: the
//! scheme corner (storage `i`, the trimmed computation load, and the coded
//! upload/download) and the full-compute corner that differs only by
//! computing every IV its storage allows. The optimal upload surface
//! `L*(r,c)` and download surface `D*(r,c)` are piecewise planar over the
//! regime `1 <= c <= r <= K`:
//!
//! - corner-span triangles, one per `i` in `[2..K-1]`, spanned by the
//!   projections of corners `i-1`, `i`, and `K` — the only facets whose
//!   points are Pareto-optimal in the full quadruple space;
//! - computation-parallel facets (the strip triangle over `r` in `[1,2]`
//!   and one trapezoid per unit strip), on which the load does not depend
//!   on `c` at all.
//!
//! Everything here is generic over [`Scalar`]; exact statements (vertex
//! consistency, edge agreement, Pareto tests) are meaningful for the
//! rational instantiation.

use crate::error::{Error, Result};
use crate::scalar::{int, ratio, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Uplink,
    Downlink,
}

/// A full storage-computation-upload-download point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SccQuadruple<S> {
    pub storage: S,
    pub computation: S,
    pub upload: S,
    pub download: S,
}

impl<S: Scalar> SccQuadruple<S> {
    pub fn project(&self, space: Space) -> SccPoint<S> {
        SccPoint {
            storage: self.storage,
            computation: self.computation,
            load: match space {
                Space::Uplink => self.upload,
                Space::Downlink => self.download,
            },
            space,
        }
    }

    /// Componentwise `<=` with at least one strict inequality (lower is
    /// better in every coordinate).
    pub fn dominates(&self, other: &SccQuadruple<S>) -> bool {
        let le = self.storage <= other.storage
            && self.computation <= other.computation
            && self.upload <= other.upload
            && self.download <= other.download;
        le && (self.storage < other.storage
            || self.computation < other.computation
            || self.upload < other.upload
            || self.download < other.download)
    }
}

/// Projection of a quadruple into one communication subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SccPoint<S> {
    pub storage: S,
    pub computation: S,
    pub load: S,
    pub space: Space,
}

fn corner_computation<S: Scalar>(node_count: u32, i: u32) -> S {
    let k = i64::from(node_count);
    let i = i64::from(i);
    ratio(i * (k - i + 1), k)
}

fn corner_load<S: Scalar>(node_count: u32, i: u32, space: Space) -> S {
    let k = i64::from(node_count);
    let i = i64::from(i);
    match space {
        Space::Uplink => ratio(k - i, k * i),
        Space::Downlink => ratio(k - i, k * (i + 1)),
    }
}

/// Corner quadruple achieved by the scheme with parameter `i`:
/// `(i, i(1-(i-1)/K), (1/i)(1-i/K), (1/(i+1))(1-i/K))`.
pub fn scheme_corner<S: Scalar>(node_count: u32, i: u32) -> SccQuadruple<S> {
    assert!(
        i >= 1 && i <= node_count,
        "corner index {i} outside [1..{node_count}]"
    );
    SccQuadruple {
        storage: int(i64::from(i)),
        computation: corner_computation(node_count, i),
        upload: corner_load(node_count, i, Space::Uplink),
        download: corner_load(node_count, i, Space::Downlink),
    }
}

/// Corner reached when every IV computable from storage `i` is computed;
/// identical to [`scheme_corner`] except the computation load is `i`.
pub fn full_compute_corner<S: Scalar>(node_count: u32, i: u32) -> SccQuadruple<S> {
    SccQuadruple {
        computation: int(i64::from(i)),
        ..scheme_corner(node_count, i)
    }
}

/// All corner quadruples for `i` in `[1..K]`: `(scheme, full-compute)`.
pub fn corner_points<S: Scalar>(node_count: u32) -> (Vec<SccQuadruple<S>>, Vec<SccQuadruple<S>>) {
    let scheme = (1..=node_count)
        .map(|i| scheme_corner(node_count, i))
        .collect();
    let full = (1..=node_count)
        .map(|i| full_compute_corner(node_count, i))
        .collect();
    (scheme, full)
}

/// Coefficients of `load = r_coeff * r + c_coeff * c + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneCoeffs<S> {
    pub r_coeff: S,
    pub c_coeff: S,
    pub constant: S,
}

impl<S: Scalar> PlaneCoeffs<S> {
    pub fn eval(&self, r: S, c: S) -> S {
        self.r_coeff * r + self.c_coeff * c + self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Triangle,
    Trapezoid,
}

/// One planar facet of a tradeoff surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet<S> {
    pub kind: FacetKind,
    /// The corner index the facet is derived from: corner-span triangles
    /// span corners `param-1`, `param`, `K`; computation-parallel facets
    /// cover the strip `r` in `[param, param+1]`.
    pub param: u32,
    /// Whether points of this facet are Pareto-optimal in quadruple space.
    pub pareto: bool,
    pub vertices: Vec<SccPoint<S>>,
    pub plane: PlaneCoeffs<S>,
}

/// Exact barycentric coordinates of `p` in the triangle `(a, b, c)`;
/// `None` when the triangle is degenerate.
pub(crate) fn barycentric<S: Scalar>(
    p: (S, S),
    a: (S, S),
    b: (S, S),
    c: (S, S),
) -> Option<(S, S, S)> {
    let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
    if det == S::zero() {
        return None;
    }
    let lb = ((p.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (p.1 - a.1)) / det;
    let lc = ((b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1)) / det;
    Some((S::one() - lb - lc, lb, lc))
}

impl<S: Scalar> Facet<S> {
    /// Whether the facet's r-c projection contains `(r, c)` (boundary
    /// inclusive).
    pub fn contains(&self, r: S, c: S) -> bool {
        let pts: Vec<(S, S)> = self
            .vertices
            .iter()
            .map(|v| (v.storage, v.computation))
            .collect();
        match self.kind {
            FacetKind::Triangle => match barycentric((r, c), pts[0], pts[1], pts[2]) {
                Some((la, lb, lc)) => la >= S::zero() && lb >= S::zero() && lc >= S::zero(),
                None => false,
            },
            FacetKind::Trapezoid => {
                // Consistent orientation test around the cyclic vertex order.
                let mut sign = 0i8;
                for j in 0..pts.len() {
                    let a = pts[j];
                    let b = pts[(j + 1) % pts.len()];
                    let cross = (b.0 - a.0) * (c - a.1) - (r - a.0) * (b.1 - a.1);
                    if cross == S::zero() {
                        continue;
                    }
                    let s = if cross > S::zero() { 1 } else { -1 };
                    if sign == 0 {
                        sign = s;
                    } else if sign != s {
                        return false;
                    }
                }
                true
            }
        }
    }

    pub fn value(&self, r: S, c: S) -> S {
        self.plane.eval(r, c)
    }
}

/// A full tradeoff surface: the ordered facet list for one space.
///
/// Facet order (ties on shared edges resolve to the lowest index):
/// corner-span triangles for `param = 2..K-1`, the strip triangle over
/// `r` in `[1,2]`, then the trapezoids for `param = 2..K-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffSurface<S> {
    node_count: u32,
    space: Space,
    facets: Vec<Facet<S>>,
}

impl<S: Scalar> TradeoffSurface<S> {
    pub fn new(node_count: u32, space: Space) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "surface needs at least 2 nodes, got {node_count}"
            )));
        }
        let vertex = |i: u32, full_compute: bool| SccPoint {
            storage: int::<S>(i64::from(i)),
            computation: if full_compute {
                int(i64::from(i))
            } else {
                corner_computation(node_count, i)
            },
            load: corner_load(node_count, i, space),
            space,
        };

        let mut facets = Vec::new();
        // Corner-span triangles: the Pareto-carrying facets.
        for i in 2..node_count {
            let k = i64::from(node_count);
            let ii = i64::from(i);
            let plane = match space {
                Space::Uplink => PlaneCoeffs {
                    r_coeff: ratio(-2, k * ii),
                    c_coeff: ratio(-1, ii * (ii - 1)),
                    constant: ratio(2 * ii - 1, ii * (ii - 1)),
                },
                Space::Downlink => PlaneCoeffs {
                    r_coeff: ratio(-(2 * ii - 1), k * ii * (ii + 1)),
                    c_coeff: ratio(-1, ii * (ii + 1)),
                    constant: ratio(2, ii + 1),
                },
            };
            facets.push(Facet {
                kind: FacetKind::Triangle,
                param: i,
                pareto: true,
                vertices: vec![
                    vertex(i - 1, false),
                    vertex(i, false),
                    vertex(node_count, false),
                ],
                plane,
            });
        }
        // Computation-parallel facets: the load depends on storage only.
        let slab_plane = |left: u32| {
            let lo: S = corner_load(node_count, left, space);
            let hi: S = corner_load(node_count, left + 1, space);
            let slope = hi - lo;
            PlaneCoeffs {
                r_coeff: slope,
                c_coeff: S::zero(),
                constant: lo - slope * int(i64::from(left)),
            }
        };
        facets.push(Facet {
            kind: FacetKind::Triangle,
            param: 1,
            pareto: false,
            vertices: vec![vertex(1, false), vertex(2, false), vertex(2, true)],
            plane: slab_plane(1),
        });
        for i in 2..node_count {
            facets.push(Facet {
                kind: FacetKind::Trapezoid,
                param: i,
                pareto: false,
                vertices: vec![
                    vertex(i, false),
                    vertex(i, true),
                    vertex(i + 1, true),
                    vertex(i + 1, false),
                ],
                plane: slab_plane(i),
            });
        }
        Ok(Self {
            node_count,
            space,
            facets,
        })
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn facets(&self) -> &[Facet<S>] {
        &self.facets
    }

    fn check_regime(&self, r: S, c: S) -> Result<()> {
        if c < S::one() || r < c || int::<S>(i64::from(self.node_count)) < r {
            return Err(Error::OutOfRegime {
                r: r.to_string(),
                c: c.to_string(),
                node_count: self.node_count,
            });
        }
        Ok(())
    }

    /// The first facet (lowest index) whose projection contains `(r, c)`.
    pub fn locate(&self, r: S, c: S) -> Result<(usize, &Facet<S>)> {
        self.check_regime(r, c)?;
        self.facets
            .iter()
            .enumerate()
            .find(|(_, f)| f.contains(r, c))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no facet contains (r={r}, c={c}); inexact scalars may fall between facets"
                ))
            })
    }

    /// `L*(r, c)` or `D*(r, c)`.
    pub fn value(&self, r: S, c: S) -> Result<S> {
        let (_, facet) = self.locate(r, c)?;
        Ok(facet.value(r, c))
    }
}

/// Convenience one-shot evaluation of a surface.
pub fn surface_value<S: Scalar>(node_count: u32, r: S, c: S, space: Space) -> Result<S> {
    TradeoffSurface::new(node_count, space)?.value(r, c)
}

/// Lower convex hull of points sorted by strictly increasing x
/// (Andrew's monotone chain; collinear middle points are dropped).
pub(crate) fn lower_convex_hull<S: Scalar>(points: &[(S, S)]) -> Vec<(S, S)> {
    let mut hull: Vec<(S, S)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= S::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Piecewise-linear curve through breakpoints with strictly increasing x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeCurve<S> {
    points: Vec<(S, S)>,
}

impl<S: Scalar> EnvelopeCurve<S> {
    pub fn breakpoints(&self) -> &[(S, S)] {
        &self.points
    }

    pub fn value(&self, x: S) -> Result<S> {
        let first = self.points.first().expect("nonempty curve").0;
        let last = self.points.last().expect("nonempty curve").0;
        if x < first || x > last {
            return Err(Error::InvalidParameter(format!(
                "argument {x} outside the curve domain [{first}, {last}]"
            )));
        }
        let j = self
            .points
            .windows(2)
            .position(|w| x <= w[1].0)
            .expect("x within domain");
        let (x0, y0) = self.points[j];
        let (x1, y1) = self.points[j + 1];
        if x == x0 {
            return Ok(y0);
        }
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// Lower convex envelopes of the per-storage loads through the integer
/// storage points `1..K`: `(upload curve, download curve)`.
///
/// For these sequences every integer point is a hull vertex, so the
/// envelope is exactly the chain of segments between consecutive corners;
/// the constructor asserts this against the generic hull routine.
pub fn envelope_curves<S: Scalar>(node_count: u32) -> Result<(EnvelopeCurve<S>, EnvelopeCurve<S>)> {
    if node_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "envelope needs at least 2 nodes, got {node_count}"
        )));
    }
    let build = |space: Space| {
        let points: Vec<(S, S)> = (1..=node_count)
            .map(|i| (int(i64::from(i)), corner_load(node_count, i, space)))
            .collect();
        let hull = lower_convex_hull(&points);
        assert_eq!(
            hull.len(),
            points.len(),
            "per-storage loads must be strictly convex over the integer points"
        );
        EnvelopeCurve { points }
    };
    Ok((build(Space::Uplink), build(Space::Downlink)))
}

/// Exact decomposition of a quadruple as a convex combination of the
/// scheme corners `i-1`, `i`, `K`. Returns the smallest admissible `i` and
/// its weights, or `None` when the point is not such a combination.
pub fn theta_decomposition<S: Scalar>(
    node_count: u32,
    quad: &SccQuadruple<S>,
) -> Option<(u32, [S; 3])> {
    let p = (quad.storage, quad.computation);
    let corner = |i: u32| {
        let q = scheme_corner::<S>(node_count, i);
        (q.storage, q.computation)
    };
    for i in 2..node_count {
        let (a, b, c) = (corner(i - 1), corner(i), corner(node_count));
        let Some((la, lb, lc)) = barycentric(p, a, b, c) else {
            continue;
        };
        if la < S::zero() || lb < S::zero() || lc < S::zero() {
            continue;
        }
        let qa = scheme_corner::<S>(node_count, i - 1);
        let qb = scheme_corner::<S>(node_count, i);
        let qc = scheme_corner::<S>(node_count, node_count);
        let combined = SccQuadruple {
            storage: la * qa.storage + lb * qb.storage + lc * qc.storage,
            computation: la * qa.computation + lb * qb.computation + lc * qc.computation,
            upload: la * qa.upload + lb * qb.upload + lc * qc.upload,
            download: la * qa.download + lb * qb.download + lc * qc.download,
        };
        if combined == *quad {
            return Some((i, [la, lb, lc]));
        }
    }
    None
}

/// Whether a feasible quadruple is Pareto-optimal: its storage-computation
/// projection lies on a corner-span triangle and both loads sit exactly on
/// the optimal surfaces. Errors on points outside the feasible region.
///
/// Two equivalent characterizations are evaluated — facet location plus
/// surface equality, and exact convex decomposition over scheme corners —
/// and asserted to agree.
pub fn is_pareto<S: Scalar>(node_count: u32, quad: &SccQuadruple<S>) -> Result<bool> {
    let uplink = TradeoffSurface::new(node_count, Space::Uplink)?;
    let downlink = TradeoffSurface::new(node_count, Space::Downlink)?;
    let (r, c) = (quad.storage, quad.computation);
    let best_upload = uplink.value(r, c)?;
    let best_download = downlink.value(r, c)?;
    let cap = S::one() - r / int(i64::from(node_count));
    if quad.upload < best_upload
        || quad.upload > cap
        || quad.download < best_download
        || quad.download > quad.upload
    {
        return Err(Error::InfeasiblePoint(format!(
            "upload {} must lie in [{best_upload}, {cap}] and download {} in [{best_download}, upload]",
            quad.upload, quad.download
        )));
    }

    let (_, facet) = uplink.locate(r, c)?;
    let by_facet = facet.pareto && quad.upload == best_upload && quad.download == best_download;
    let by_theta = theta_decomposition(node_count, quad).is_some();
    assert_eq!(
        by_facet, by_theta,
        "facet and convex-decomposition characterizations must agree at (r={r}, c={c})"
    );
    Ok(by_facet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, Rat};

    fn quad(k: u32, i: u32) -> SccQuadruple<Rat> {
        scheme_corner(k, i)
    }

    #[test]
    fn corner_values() {
        let p2 = quad(3, 2);
        assert_eq!(
            (p2.storage, p2.computation, p2.upload, p2.download),
            (rat(2, 1), rat(4, 3), rat(1, 6), rat(1, 9))
        );
        for k in 2..=10 {
            let pk = quad(k, k);
            assert_eq!(
                (pk.storage, pk.computation, pk.upload, pk.download),
                (rat(i64::from(k), 1), rat(1, 1), rat(0, 1), rat(0, 1))
            );
        }
        let p1 = quad(10, 1);
        assert_eq!(
            (p1.storage, p1.computation, p1.upload, p1.download),
            (rat(1, 1), rat(1, 1), rat(9, 10), rat(9, 20))
        );
        let q3 = full_compute_corner::<Rat>(10, 3);
        assert_eq!(q3.computation, rat(3, 1));
        assert_eq!(q3.upload, quad(10, 3).upload);
    }

    #[test]
    fn every_vertex_lies_on_its_facet_plane() {
        for k in 2..=8u32 {
            for space in [Space::Uplink, Space::Downlink] {
                let surface = TradeoffSurface::<Rat>::new(k, space).unwrap();
                for facet in surface.facets() {
                    for v in &facet.vertices {
                        assert_eq!(
                            facet.plane.eval(v.storage, v.computation),
                            v.load,
                            "K={k} {space:?} facet {:?}/{}",
                            facet.kind,
                            facet.param
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn plane_coefficients_are_nonpositive() {
        for k in 2..=10u32 {
            for space in [Space::Uplink, Space::Downlink] {
                let surface = TradeoffSurface::<Rat>::new(k, space).unwrap();
                for facet in surface.facets() {
                    assert!(facet.plane.r_coeff <= rat(0, 1));
                    assert!(facet.plane.c_coeff <= rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn locate_examples() {
        let surface = TradeoffSurface::<Rat>::new(10, Space::Uplink).unwrap();
        // On the c = r boundary: a computation-parallel facet.
        let (_, facet) = surface.locate(rat(5, 1), rat(5, 1)).unwrap();
        assert_eq!(facet.kind, FacetKind::Trapezoid);
        assert!(!facet.pareto);

        // A scheme corner sits on its own corner-span triangle.
        let surface = TradeoffSurface::<Rat>::new(3, Space::Uplink).unwrap();
        let (_, facet) = surface.locate(rat(2, 1), rat(4, 3)).unwrap();
        assert_eq!(facet.kind, FacetKind::Triangle);
        assert!(facet.pareto);
        assert_eq!(facet.param, 2);

        assert!(matches!(
            surface.locate(rat(4, 1), rat(1, 1)),
            Err(Error::OutOfRegime { .. })
        ));
        assert!(matches!(
            surface.locate(rat(2, 1), rat(5, 2)),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn two_node_surface_is_a_single_facet() {
        let surface = TradeoffSurface::<Rat>::new(2, Space::Downlink).unwrap();
        assert_eq!(surface.facets().len(), 1);
        assert_eq!(surface.value(rat(3, 2), rat(5, 4)).unwrap(), rat(1, 8));
    }

    #[test]
    fn surface_value_examples() {
        assert_eq!(
            surface_value(3, rat(2, 1), rat(4, 3), Space::Downlink).unwrap(),
            rat(1, 9)
        );
        for k in [3u32, 6, 10] {
            assert_eq!(
                surface_value(k, rat(i64::from(k), 1), rat(1, 1), Space::Uplink).unwrap(),
                rat(0, 1)
            );
            assert_eq!(
                surface_value(k, rat(i64::from(k), 1), rat(1, 1), Space::Downlink).unwrap(),
                rat(0, 1)
            );
        }
        // Full-compute corner 3 for K=10 lies in the trapezoid region.
        assert_eq!(
            surface_value(10, rat(3, 1), rat(3, 1), Space::Uplink).unwrap(),
            rat(7, 30)
        );
    }

    #[test]
    fn adjacent_facets_agree_on_shared_edges() {
        let mut rng_state = 0x3141_5926u64;
        let mut next = move || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((rng_state >> 33) % 97) as i64
        };
        for space in [Space::Uplink, Space::Downlink] {
            let surface = TradeoffSurface::<Rat>::new(6, space).unwrap();
            let facets = surface.facets();
            let mut checked = 0usize;
            for a in 0..facets.len() {
                for b in a + 1..facets.len() {
                    let shared: Vec<(Rat, Rat)> = facets[a]
                        .vertices
                        .iter()
                        .filter(|va| {
                            facets[b].vertices.iter().any(|vb| {
                                va.storage == vb.storage && va.computation == vb.computation
                            })
                        })
                        .map(|v| (v.storage, v.computation))
                        .collect();
                    if shared.len() < 2 {
                        continue;
                    }
                    for _ in 0..10 {
                        let t = rat(next(), 97);
                        let r = shared[0].0 + (shared[1].0 - shared[0].0) * t;
                        let c = shared[0].1 + (shared[1].1 - shared[0].1) * t;
                        assert_eq!(
                            facets[a].value(r, c),
                            facets[b].value(r, c),
                            "{space:?} facets {a}/{b} at t={t}"
                        );
                        checked += 1;
                    }
                }
            }
            assert!(checked >= 100, "only {checked} edge points checked");
        }
    }

    #[test]
    fn envelope_examples() {
        let (upload, download) = envelope_curves::<Rat>(3).unwrap();
        assert_eq!(upload.value(rat(2, 1)).unwrap(), rat(1, 6));
        assert_eq!(upload.value(rat(3, 1)).unwrap(), rat(0, 1));
        assert_eq!(download.value(rat(3, 1)).unwrap(), rat(0, 1));

        // Midpoint of corners 2 and 3 for K=10.
        let (upload, _) = envelope_curves::<Rat>(10).unwrap();
        assert_eq!(upload.value(rat(5, 2)).unwrap(), rat(19, 60));
        assert!(upload.value(rat(11, 1)).is_err());
    }

    /// Independent envelope oracle: the lower envelope value at x is the
    /// minimum over all point pairs straddling x of their interpolation.
    fn pairwise_envelope(points: &[(Rat, Rat)], x: Rat) -> Rat {
        let mut best: Option<Rat> = None;
        for (j, &(x0, y0)) in points.iter().enumerate() {
            if x0 == x && best.is_none_or(|b| y0 < b) {
                best = Some(y0);
            }
            for &(x1, y1) in &points[j + 1..] {
                if x0 <= x && x <= x1 && x0 < x1 {
                    let v = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                    if best.is_none_or(|b| v < b) {
                        best = Some(v);
                    }
                }
            }
        }
        best.expect("x inside the point range")
    }

    #[test]
    fn envelope_matches_the_pairwise_oracle() {
        for k in [3u32, 5, 10] {
            let (upload, download) = envelope_curves::<Rat>(k).unwrap();
            for curve in [&upload, &download] {
                for step in 0..=40 {
                    let x = rat(1, 1) + rat(step * (i64::from(k) - 1), 40);
                    assert_eq!(
                        curve.value(x).unwrap(),
                        pairwise_envelope(curve.breakpoints(), x),
                        "K={k} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn diagonal_slice_matches_the_envelopes() {
        let k = 6u32;
        let uplink = TradeoffSurface::<Rat>::new(k, Space::Uplink).unwrap();
        let downlink = TradeoffSurface::<Rat>::new(k, Space::Downlink).unwrap();
        let (upload, download) = envelope_curves::<Rat>(k).unwrap();
        for step in 0..=50 {
            let r = rat(1, 1) + rat(step * (i64::from(k) - 1), 50);
            assert_eq!(uplink.value(r, r).unwrap(), upload.value(r).unwrap());
            assert_eq!(downlink.value(r, r).unwrap(), download.value(r).unwrap());
        }
    }

    #[test]
    fn pareto_examples() {
        assert!(is_pareto(3, &quad(3, 2)).unwrap());
        assert!(is_pareto(10, &quad(10, 10)).unwrap());
        assert!(is_pareto(5, &quad(5, 1)).unwrap());
        // Full-compute corner 3 for K=10 is dominated in computation.
        assert!(!is_pareto(10, &full_compute_corner::<Rat>(10, 3)).unwrap());
        // Feasible but strictly above the upload surface: not optimal.
        let mut slack = quad(5, 2);
        slack.upload += rat(1, 100);
        assert!(!is_pareto(5, &slack).unwrap());
        // Outside the feasible region entirely.
        let mut bad = quad(5, 2);
        bad.download = bad.upload + rat(1, 2);
        assert!(is_pareto(5, &bad).is_err());
    }

    #[test]
    fn theta_decomposition_roundtrip() {
        let k = 6u32;
        let (w1, w2, w3) = (rat(1, 2), rat(1, 3), rat(1, 6));
        let (a, b, c) = (quad(k, 2), quad(k, 3), quad(k, 6));
        let mixed = SccQuadruple {
            storage: w1 * a.storage + w2 * b.storage + w3 * c.storage,
            computation: w1 * a.computation + w2 * b.computation + w3 * c.computation,
            upload: w1 * a.upload + w2 * b.upload + w3 * c.upload,
            download: w1 * a.download + w2 * b.download + w3 * c.download,
        };
        let (i, weights) = theta_decomposition(k, &mixed).unwrap();
        assert_eq!(i, 3);
        assert_eq!(weights, [w1, w2, w3]);
        assert!(is_pareto(k, &mixed).unwrap());
    }

    #[test]
    fn surfaces_are_monotone_on_a_grid() {
        let k = 5u32;
        let steps = 24i64;
        let grid: Vec<Rat> = (0..=steps)
            .map(|s| rat(1, 1) + rat(s * (i64::from(k) - 1), steps))
            .collect();
        for space in [Space::Uplink, Space::Downlink] {
            let surface = TradeoffSurface::<Rat>::new(k, space).unwrap();
            for (ci, c) in grid.iter().enumerate() {
                for ri in ci..grid.len() {
                    let r = grid[ri];
                    let here = surface.value(r, *c).unwrap();
                    if ri + 1 < grid.len() {
                        assert!(surface.value(grid[ri + 1], *c).unwrap() <= here);
                    }
                    if ci < ri && ci + 1 < grid.len() {
                        assert!(surface.value(r, grid[ci + 1]).unwrap() <= here);
                    }
                }
            }
        }
    }

    #[test]
    fn float_instantiation_approximates_the_exact_surface() {
        let exact = surface_value(10, rat(3, 1), rat(12, 5), Space::Downlink).unwrap();
        let float = surface_value(10, 3.0f64, 2.4, Space::Downlink).unwrap();
        assert_eq!(exact, rat(7, 40));
        assert!((float - 7.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn download_never_exceeds_upload() {
        let k = 5u32;
        let uplink = TradeoffSurface::<Rat>::new(k, Space::Uplink).unwrap();
        let downlink = TradeoffSurface::<Rat>::new(k, Space::Downlink).unwrap();
        for rs in 0..=20i64 {
            let r = rat(1, 1) + rat(rs * 4, 20);
            for cs in 0..=rs {
                let c = rat(1, 1) + rat(cs * 4, 20);
                let l = uplink.value(r, c).unwrap();
                let d = downlink.value(r, c).unwrap();
                if r == rat(5, 1) {
                    assert_eq!(l, rat(0, 1));
                    assert_eq!(d, rat(0, 1));
                } else {
                    assert!(d < l, "(r={r}, c={c})");
                }
            }
        }
        // Corner ratio: download/upload = i/(i+1).
        for i in 1..=4u32 {
            let p = quad(k, i);
            assert_eq!(p.download / p.upload, rat(i64::from(i), i64::from(i) + 1));
        }
    }
}
