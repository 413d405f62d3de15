//! Plain-text coefficient files.
//!
//! ```text
//! # kind=iir
//! # N=20 n_fos=9
//! # fs_hz=1280000000 fp_hz=29000000 fa_hz=35000000
//! 1,0,-4.1234567890123457e-1
//! 1,1,2.0000000000000000e-1,3.0000000000000000e-1
//! ```
//!
//! FIR bodies hold one tap per line. IIR bodies hold `branch,section,alpha`
//! for real coefficients and `branch,section,re,im` for complex ones.

use super::{
    AllPassPrototype, DesignError, FilterKind, FirPrototype, Prototype, PrototypeSpec,
};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_coefficients<W: Write>(filter: &Prototype, mut w: W) -> std::io::Result<()> {
    let (kind, n, n_fos) = match filter {
        Prototype::Fir(p) => ("fir", p.num_branches(), p.n_fos()),
        Prototype::AllPass(p) => ("iir", p.num_branches(), p.n_fos()),
    };
    writeln!(w, "# kind={kind}")?;
    writeln!(w, "# N={n} n_fos={n_fos}")?;
    if let Some(s) = filter.spec() {
        writeln!(
            w,
            "# fs_hz={} fp_hz={} fa_hz={}",
            s.sample_rate, s.passband_edge, s.stopband_edge
        )?;
        writeln!(
            w,
            "# passband_ripple={} stopband_ripple={}",
            s.passband_ripple, s.stopband_ripple
        )?;
    }
    match filter {
        Prototype::Fir(p) => {
            for &t in p.taps() {
                writeln!(w, "{}", num(t))?;
            }
        }
        Prototype::AllPass(p) => {
            for b in 1..p.num_branches() {
                for (m, a) in p.alphas(b).iter().enumerate() {
                    if a.im == 0.0 {
                        writeln!(w, "{b},{m},{}", num(a.re))?;
                    } else {
                        writeln!(w, "{b},{m},{},{}", num(a.re), num(a.im))?;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn export_coefficients(filter: &Prototype, path: impl AsRef<Path>) -> Result<(), DesignError> {
    let mut buf = Vec::new();
    write_coefficients(filter, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn import_coefficients(path: impl AsRef<Path>) -> Result<Prototype, DesignError> {
    read_coefficients(std::fs::File::open(path)?)
}

fn perr(line: usize, message: impl Into<String>) -> DesignError {
    DesignError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64, DesignError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| perr(line, format!("invalid number '{}'", s.trim())))?;
    if !v.is_finite() {
        return Err(perr(line, format!("non-finite number '{}'", s.trim())));
    }
    Ok(v)
}

fn parse_usize(s: &str, line: usize) -> Result<usize, DesignError> {
    s.trim()
        .parse()
        .map_err(|_| perr(line, format!("invalid integer '{}'", s.trim())))
}

pub fn read_coefficients<R: Read>(r: R) -> Result<Prototype, DesignError> {
    let mut meta: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut body: Vec<(usize, String)> = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            for tok in rest.split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    meta.insert(k.to_string(), (v.to_string(), line_no));
                }
            }
        } else {
            body.push((line_no, t.to_string()));
        }
    }
    let get = |k: &str| meta.get(k).map(|(v, l)| (v.as_str(), *l));
    let (kind, kind_line) = get("kind").ok_or_else(|| perr(1, "missing '# kind=' metadata"))?;
    let n = match get("N") {
        Some((v, l)) => parse_usize(v, l)?,
        None => return Err(perr(kind_line, "missing '# N=' metadata")),
    };
    if n == 0 {
        return Err(perr(kind_line, "N must be at least 1"));
    }

    let spec_kind = match kind {
        "fir" => FilterKind::Fir,
        "iir" => FilterKind::Iir,
        other => return Err(perr(kind_line, format!("unknown kind '{other}'"))),
    };
    let spec = match (
        get("fs_hz"),
        get("fp_hz"),
        get("fa_hz"),
        get("passband_ripple"),
        get("stopband_ripple"),
    ) {
        (Some((fs, l)), Some((fp, _)), Some((fa, _)), Some((dp, _)), Some((ds, _))) => {
            let s = PrototypeSpec::new(
                parse_f64(fs, l)?,
                parse_f64(fp, l)?,
                parse_f64(fa, l)?,
                parse_f64(dp, l)?,
                parse_f64(ds, l)?,
                n,
                spec_kind,
            )
            .map_err(|e| perr(l, e.to_string()))?;
            Some(s)
        }
        _ => None,
    };

    let proto = match spec_kind {
        FilterKind::Fir => {
            let taps = body
                .iter()
                .map(|(l, s)| parse_f64(s, *l))
                .collect::<Result<Vec<_>, _>>()?;
            if taps.is_empty() {
                return Err(perr(kind_line, "FIR file has no taps"));
            }
            let mut p = FirPrototype::new(taps, n)?;
            if let Some(s) = spec {
                p = p.with_spec(s);
            }
            Prototype::Fir(p)
        }
        FilterKind::Iir => {
            let n_fos = match get("n_fos") {
                Some((v, l)) => parse_usize(v, l)?,
                None => return Err(perr(kind_line, "missing '# n_fos=' metadata")),
            };
            let mut alphas: Vec<Vec<Option<Complex64>>> = vec![vec![None; n_fos]; n - 1];
            for (l, s) in &body {
                let f: Vec<&str> = s.split(',').collect();
                if f.len() != 3 && f.len() != 4 {
                    return Err(perr(*l, "expected 'branch,section,alpha[,imag]'"));
                }
                let b = parse_usize(f[0], *l)?;
                let m = parse_usize(f[1], *l)?;
                if b == 0 || b >= n {
                    return Err(perr(*l, format!("branch {b} outside [1, {}]", n - 1)));
                }
                if m >= n_fos {
                    return Err(perr(*l, format!("section {m} outside [0, {}]", n_fos - 1)));
                }
                let re = parse_f64(f[2], *l)?;
                let im = if f.len() == 4 { parse_f64(f[3], *l)? } else { 0.0 };
                let a = Complex64::new(re, im);
                if a.norm() >= 1.0 {
                    return Err(DesignError::Unstable {
                        branch: b,
                        section: m,
                        magnitude: a.norm(),
                    });
                }
                if alphas[b - 1][m].replace(a).is_some() {
                    return Err(perr(*l, format!("duplicate entry for branch {b}, section {m}")));
                }
            }
            let mut full = Vec::with_capacity(n - 1);
            for (i, branch) in alphas.into_iter().enumerate() {
                let mut row = Vec::with_capacity(n_fos);
                for (m, a) in branch.into_iter().enumerate() {
                    row.push(a.ok_or_else(|| {
                        perr(kind_line, format!("missing branch {}, section {m}", i + 1))
                    })?);
                }
                full.push(row);
            }
            let mut p = AllPassPrototype::new(n, n_fos, full)?;
            if let Some(s) = spec {
                p = p.with_spec(s);
            }
            Prototype::AllPass(p)
        }
    };
    Ok(proto)
}
