use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::profile::{format_f64, parse_f64, GroupMarginal, GroupSpace, RiskProfile};

/// Vertices closer than this in every cell are merged.
pub const DEDUP_TOL: f64 = 1e-12;

/// Convex hull of finitely many risk profiles over one space. The hull
/// itself is never materialized; mixtures are represented by weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskPolytope {
    space: GroupSpace,
    vertices: Vec<RiskProfile>,
}

impl RiskPolytope {
    pub fn new(space: GroupSpace, vertices: Vec<RiskProfile>) -> Result<Self> {
        let mut kept: Vec<RiskProfile> = Vec::with_capacity(vertices.len());
        for v in vertices {
            space.ensure_same(v.space())?;
            let dup = kept.iter().any(|k| {
                k.values()
                    .iter()
                    .zip(v.values())
                    .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
            });
            if !dup {
                kept.push(v);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        Ok(RiskPolytope { space, vertices: kept })
    }

    /// Vertices given as flat row-major value vectors.
    pub fn from_values(space: GroupSpace, vertices: &[Vec<f64>]) -> Result<Self> {
        let vs = vertices
            .iter()
            .map(|v| RiskProfile::new(space.clone(), v.clone()))
            .collect::<Result<_>>()?;
        RiskPolytope::new(space, vs)
    }

    pub fn space(&self) -> &GroupSpace {
        &self.space
    }

    pub fn vertices(&self) -> &[RiskProfile] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Tie tolerance for argmin and fairness decisions,
    /// `1e-7 * (1 + max |vertex entry|)`.
    pub fn tie_tolerance(&self) -> f64 {
        let m = self.vertices.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
        1e-7 * (1.0 + m)
    }

    /// Profile of a mixture of vertices.
    pub fn mixture(&self, weights: &[f64]) -> Result<RiskProfile> {
        if weights.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} vertices",
                weights.len(),
                self.len()
            )));
        }
        let mut out = vec![0.0; self.space.n_cells()];
        for (v, &w) in self.vertices.iter().zip(weights) {
            for (o, &x) in out.iter_mut().zip(v.values()) {
                *o += w * x;
            }
        }
        RiskProfile::new(self.space.clone(), out)
    }

    /// One vertex per row under a header of `group|disc` cell names.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(header_names(&self.space))?;
        for v in &self.vertices {
            w.write_record(v.values().iter().map(|&x| format_f64(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = reader_for(reader);
        let header = rdr.headers()?.clone();
        let space = space_from_header(header.iter())?;
        let mut vertices = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            vertices.push(parse_row(rec.iter(), space.n_cells(), line)?);
        }
        RiskPolytope::from_values(space, &vertices)
    }
}

/// A polytope together with target and training marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryInstance {
    pub polytope: RiskPolytope,
    pub p_star: GroupMarginal,
    pub p_tilde: GroupMarginal,
}

impl GeometryInstance {
    /// Rows `role,<cells...>` with role one of `vertex`, `p_star`, `p_tilde`.
    pub fn write_csv<W: Write>(&self, writer: W, comment: Option<&str>) -> Result<()> {
        let mut writer = writer;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(writer, "# {line}")?;
            }
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["role".to_string()];
        header.extend(header_names(self.polytope.space()));
        w.write_record(&header)?;
        let mut put = |role: &str, values: &[f64]| -> Result<()> {
            let mut rec = vec![role.to_string()];
            rec.extend(values.iter().map(|&x| format_f64(x)));
            w.write_record(&rec)?;
            Ok(())
        };
        for v in self.polytope.vertices() {
            put("vertex", v.values())?;
        }
        put("p_star", self.p_star.probs())?;
        put("p_tilde", self.p_tilde.probs())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = reader_for(reader);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("role") {
            return Err(Error::parse(1, "first column must be `role`"));
        }
        let space = space_from_header(header.iter().skip(1))?;
        let mut vertices = Vec::new();
        let mut p_star = None;
        let mut p_tilde = None;
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let values = parse_row(rec.iter().skip(1), space.n_cells(), line)?;
            match &rec[0] {
                "vertex" => vertices.push(values),
                "p_star" => p_star = Some(values),
                "p_tilde" => p_tilde = Some(values),
                other => return Err(Error::parse(line, format!("unknown role `{other}`"))),
            }
        }
        let p_star = p_star.ok_or_else(|| Error::Schema("missing `p_star` row".into()))?;
        let p_tilde = p_tilde.ok_or_else(|| Error::Schema("missing `p_tilde` row".into()))?;
        Ok(GeometryInstance {
            polytope: RiskPolytope::from_values(space.clone(), &vertices)?,
            p_star: GroupMarginal::new(space.clone(), p_star)?,
            p_tilde: GroupMarginal::new(space, p_tilde)?,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        GeometryInstance::read_csv(std::fs::File::open(path)?)
    }
}

fn reader_for<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn header_names(space: &GroupSpace) -> Vec<String> {
    if space.is_trivial_disc() {
        space.groups().to_vec()
    } else {
        space.cell_names()
    }
}

/// Space from `group|disc` names in row-major order, or plain group names
/// for a risk-parity space.
fn space_from_header<'a>(names: impl Iterator<Item = &'a str>) -> Result<GroupSpace> {
    let names: Vec<&str> = names.collect();
    if names.is_empty() {
        return Err(Error::parse(1, "no cell columns"));
    }
    if names.iter().all(|n| !n.contains('|')) {
        return GroupSpace::risk_parity(names.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    }
    let mut groups: Vec<String> = Vec::new();
    let mut discs: Vec<String> = Vec::new();
    let mut pairs = Vec::with_capacity(names.len());
    for n in &names {
        let (g, v) = n
            .split_once('|')
            .ok_or_else(|| Error::parse(1, format!("column `{n}` is not `group|disc`")))?;
        if !groups.iter().any(|x| x == g) {
            groups.push(g.to_string());
        }
        if !discs.iter().any(|x| x == v) {
            discs.push(v.to_string());
        }
        pairs.push((g.to_string(), v.to_string()));
    }
    let space = GroupSpace::new(groups, discs)?;
    let expected = space.cell_names();
    let got: Vec<String> = pairs.iter().map(|(g, v)| format!("{g}|{v}")).collect();
    if got != expected {
        return Err(Error::parse(
            1,
            format!("cell columns must be row-major `group|disc`: expected {}", expected.join(",")),
        ));
    }
    Ok(space)
}

fn parse_row<'a>(fields: impl Iterator<Item = &'a str>, n: usize, line: u64) -> Result<Vec<f64>> {
    let values = fields.map(|f| parse_f64(f, line)).collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        return Err(Error::parse(line, format!("expected {n} values, found {}", values.len())));
    }
    Ok(values)
}

impl std::ops::Index<usize> for RiskPolytope {
    type Output = RiskProfile;
    fn index(&self, i: usize) -> &RiskProfile {
        &self.vertices[i]
    }
}
