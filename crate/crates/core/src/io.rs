//! Kernel and spectrum dumps. Column layouts are documented in `docs/formats.md`.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::kernels::{Geometry, SampledKernel};

pub const MAGIC: [u8; 4] = *b"BFKG";
pub const FORMAT_VERSION: u32 = 1;

/// Shortest round-trip representation; identical values print identically.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn geometry_line(g: &Geometry) -> String {
    match g {
        Geometry::Flat => "# geometry: flat".into(),
        Geometry::TimeCircle { beta } => format!("# geometry: time_circle beta={}", num(*beta)),
        Geometry::SpaceTorus { lengths } => {
            format!("# geometry: space_torus lengths={}", lengths.iter().map(|l| num(*l)).collect::<Vec<_>>().join(";"))
        }
        Geometry::FullTorus { beta, lengths } => format!(
            "# geometry: full_torus beta={} lengths={}",
            num(*beta),
            lengths.iter().map(|l| num(*l)).collect::<Vec<_>>().join(";")
        ),
    }
}

/// `t, x1..xd, re, im`, one row per grid point, preceded by a geometry comment.
pub fn write_kernel_csv<W: Write>(k: &SampledKernel, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", geometry_line(&k.grid.geometry))?;
    let d = k.grid.spatial_dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(["re".into(), "im".into()]);
    writeln!(w, "{}", header.join(","))?;
    for (i, t) in k.grid.time_points.iter().enumerate() {
        for (j, x) in k.grid.space_points.iter().enumerate() {
            let v = k.value(i, j);
            let mut row = vec![num(*t)];
            row.extend(x.iter().map(|c| num(*c)));
            row.push(num(v.re));
            row.push(num(v.im));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}

fn geometry_code(g: &Geometry) -> u32 {
    match g {
        Geometry::Flat => 0,
        Geometry::TimeCircle { .. } => 1,
        Geometry::SpaceTorus { .. } => 2,
        Geometry::FullTorus { .. } => 3,
    }
}

/// A kernel grid as read back from the binary format.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub geometry: Geometry,
    pub time_points: Vec<f64>,
    pub space_points: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
}

impl From<&SampledKernel> for KernelGrid {
    fn from(k: &SampledKernel) -> Self {
        KernelGrid {
            geometry: k.grid.geometry.clone(),
            time_points: k.grid.time_points.clone(),
            space_points: k.grid.space_points.clone(),
            values: k.values.clone(),
        }
    }
}

/// Header: magic, version, geometry code, nt, nx, d (all u32 LE), then
/// `beta` and `d` lengths (f64, NaN when absent), then the time points,
/// space points (row major), and `(re, im)` pairs, all f64 LE.
pub fn write_kernel_binary<W: Write>(k: &KernelGrid, mut w: W) -> io::Result<()> {
    let d = k.space_points.first().map_or(0, |x| x.len());
    w.write_all(&MAGIC)?;
    for u in [FORMAT_VERSION, geometry_code(&k.geometry), k.time_points.len() as u32, k.space_points.len() as u32, d as u32] {
        w.write_all(&u.to_le_bytes())?;
    }
    let (beta, lengths) = match &k.geometry {
        Geometry::Flat => (f64::NAN, None),
        Geometry::TimeCircle { beta } => (*beta, None),
        Geometry::SpaceTorus { lengths } => (f64::NAN, Some(lengths)),
        Geometry::FullTorus { beta, lengths } => (*beta, Some(lengths)),
    };
    let mut put = |x: f64| w.write_all(&x.to_le_bytes());
    put(beta)?;
    for i in 0..d {
        put(lengths.and_then(|l| l.get(i).copied()).unwrap_or(f64::NAN))?;
    }
    for &t in &k.time_points {
        put(t)?;
    }
    for x in &k.space_points {
        for &c in x {
            put(c)?;
        }
    }
    for v in &k.values {
        put(v.re)?;
        put(v.im)?;
    }
    Ok(())
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn read_kernel_binary<R: Read>(mut r: R) -> io::Result<KernelGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(bad("not a kernel grid file"));
    }
    let mut u32s = [0u32; 5];
    for u in &mut u32s {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *u = u32::from_le_bytes(b);
    }
    let [version, code, nt, nx, d] = u32s;
    if version != FORMAT_VERSION {
        return Err(bad("unsupported format version"));
    }
    let mut get = || -> io::Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let beta = get()?;
    let lengths = (0..d).map(|_| get()).collect::<io::Result<Vec<f64>>>()?;
    let geometry = match code {
        0 => Geometry::Flat,
        1 => Geometry::TimeCircle { beta },
        2 => Geometry::SpaceTorus { lengths },
        3 => Geometry::FullTorus { beta, lengths },
        _ => return Err(bad("unknown geometry code")),
    };
    let time_points = (0..nt).map(|_| get()).collect::<io::Result<Vec<f64>>>()?;
    let space_points = (0..nx)
        .map(|_| (0..d).map(|_| get()).collect::<io::Result<Vec<f64>>>())
        .collect::<io::Result<Vec<_>>>()?;
    let values = (0..nt as usize * nx as usize)
        .map(|_| Ok(Complex64::new(get()?, get()?)))
        .collect::<io::Result<Vec<_>>>()?;
    Ok(KernelGrid { geometry, time_points, space_points, values })
}

/// `sector, index, value` with the sector given by its integer momentum label.
pub fn write_spectrum_csv<W: Write>(rows: &[(i64, usize, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "sector,index,value")?;
    for (s, i, v) in rows {
        writeln!(w, "{s},{i},{}", num(*v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = KernelGrid {
            geometry: Geometry::FullTorus { beta: 2.0, lengths: vec![8.0] },
            time_points: vec![-0.5, 0.25],
            space_points: vec![vec![0.0], vec![1.0], vec![2.5]],
            values: (0..6).map(|i| Complex64::new(i as f64 / 7.0, -(i as f64).sqrt())).collect(),
        };
        let mut buf = Vec::new();
        write_kernel_binary(&g, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 20 + 8 * (1 + 1 + 2 + 3 + 12));
        assert_eq!(read_kernel_binary(&buf[..]).unwrap(), g);
        buf[0] = b'X';
        assert!(read_kernel_binary(&buf[..]).is_err());
    }

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        let mut buf = Vec::new();
        write_spectrum_csv(&[(0, 0, 0.0), (-2, 3, 1.5)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "sector,index,value\n0,0,0e0\n-2,3,1.5e0\n");
    }
}
