//! Field dumps: comment header describing the grid, then `x[,y[,z]],phi`
//! rows at 17 significant digits.

use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use egpe_core::{Field, Grid, RadialGrid, TensorGrid};

use crate::config::fmt_f64;

pub fn write_field(out: &mut impl Write, field: &Field, mass: f64) -> Result<()> {
    let grid = field.grid();
    let d = grid.dimension();
    writeln!(out, "# egpe field dump")?;
    writeln!(out, "# schema=1")?;
    writeln!(out, "# dimension={d}")?;
    match grid {
        Grid::Radial(g) => writeln!(
            out,
            "# grid=radial outer_radius={} cells={}",
            fmt_f64(g.outer_radius()),
            g.cells()
        )?,
        Grid::Tensor(g) => {
            let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";");
            let nodes: Vec<String> = g.nodes().iter().map(|n| n.to_string()).collect();
            writeln!(
                out,
                "# grid=tensor lower={} upper={} nodes={}",
                join(g.lower()),
                join(g.upper()),
                nodes.join(";")
            )?
        }
    }
    writeln!(out, "# mass={}", fmt_f64(mass))?;
    let axes = ["x", "y", "z"];
    writeln!(out, "{},phi", axes[..d].join(","))?;
    for (i, v) in field.values().iter().enumerate() {
        for x in grid.coordinates(i) {
            write!(out, "{},", fmt_f64(x))?;
        }
        writeln!(out, "{}", fmt_f64(*v))?;
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(';').map(|x| x.parse().ok()).collect()
}

/// Rebuilds the field and its mass from a dump.
pub fn read_field(text: &str) -> Result<(Field, f64)> {
    let mut dim = None;
    let mut grid = None;
    let mut mass = None;
    let mut values = Vec::new();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let at = || format!("line {}", n + 1);
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("dimension=") {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|_| anyhow!("{}: bad dimension", at()))?,
                );
            } else if let Some(v) = comment.strip_prefix("mass=") {
                mass = Some(
                    v.parse::<f64>()
                        .map_err(|_| anyhow!("{}: bad mass", at()))?,
                );
            } else if let Some(spec) = comment.strip_prefix("grid=") {
                grid = Some(parse_grid(spec, dim).with_context(at)?);
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if !line.ends_with("phi") {
                bail!("{}: expected the column header", at());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("");
        values.push(
            last.parse::<f64>()
                .map_err(|_| anyhow!("{}: bad value `{last}`", at()))?,
        );
    }
    let grid = grid.ok_or_else(|| anyhow!("dump has no grid line"))?;
    let mass = mass.ok_or_else(|| anyhow!("dump has no mass line"))?;
    if values.len() != grid.node_count() {
        bail!(
            "dump has {} rows but the grid has {} nodes",
            values.len(),
            grid.node_count()
        );
    }
    Ok((Field::new(grid, values)?, mass))
}

fn parse_grid(spec: &str, dim: Option<usize>) -> Result<Grid> {
    let dim = dim.ok_or_else(|| anyhow!("grid line before dimension line"))?;
    let mut words = spec.split_whitespace();
    let kind = words.next().unwrap_or("");
    let mut field = |name: &str| -> Result<String> {
        let w = words
            .next()
            .ok_or_else(|| anyhow!("grid line lacks `{name}`"))?;
        w.strip_prefix(&format!("{name}="))
            .map(str::to_owned)
            .ok_or_else(|| anyhow!("grid line: expected `{name}=`, got `{w}`"))
    };
    Ok(match kind {
        "radial" => {
            let r = field("outer_radius")?
                .parse()
                .map_err(|_| anyhow!("bad outer_radius"))?;
            let m = field("cells")?.parse().map_err(|_| anyhow!("bad cells"))?;
            Grid::Radial(RadialGrid::new(dim, r, m)?)
        }
        "tensor" => {
            let lower = parse_list(&field("lower")?).ok_or_else(|| anyhow!("bad lower"))?;
            let upper = parse_list(&field("upper")?).ok_or_else(|| anyhow!("bad upper"))?;
            let nodes = parse_list(&field("nodes")?).ok_or_else(|| anyhow!("bad nodes"))?;
            let g = TensorGrid::new(lower, upper, nodes)?;
            if g.dimension() != dim {
                bail!("grid dimension disagrees with the dimension line");
            }
            Grid::Tensor(g)
        }
        other => bail!("unknown grid kind `{other}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(grid: Grid) {
        let f = Field::from_fn(grid, |x| {
            (-x.iter().map(|v| v * v).sum::<f64>()).exp() / 3.0
        })
        .unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, 1.0 / 7.0).unwrap();
        let (back, mass) = read_field(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(mass, 1.0 / 7.0);
        assert!(back
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn dumps_are_lossless() {
        round_trip(Grid::Radial(RadialGrid::new(3, 1.3, 17).unwrap()));
        round_trip(Grid::Tensor(
            TensorGrid::new(vec![-1.0, 0.0], vec![1.0, 0.3], vec![9, 11]).unwrap(),
        ));
        round_trip(Grid::Tensor(TensorGrid::cube(3, 0.7, 8).unwrap()));
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let f = Field::from_fn(RadialGrid::new(1, 1.0, 8).unwrap(), |x| 1.0 - x[0]).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, 1.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text
            .lines()
            .take(text.lines().count() - 1)
            .collect::<Vec<_>>()
            .join("\n");
        assert!(read_field(&cut).is_err());
    }
}
