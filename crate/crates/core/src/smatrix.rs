//! S-matrix blocks: one state-to-state channel at one energy.
//!
//! Text format (UTF-8, `#` starts a comment):
//!
//! ```text
//! # energy: 0.73 eV
//! k 1.0 A^-1
//! channel j=0 jp=2 v=0 vp=0 Jmax=40
//! <J> <Omega> <OmegaPrime> <Re> <Im>
//! ...
//! ```
//!
//! A `# energy: <text>` comment before the header fills the free-text energy
//! label. Entries absent from the file are exactly zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Channel metadata shared by every entry of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelHeader {
    pub energy_label: String,
    /// Initial relative wavenumber.
    pub k: f64,
    /// Length unit tag for `k` (k is in unit⁻¹, cross sections in unit²).
    pub length_unit: String,
    pub j: u32,
    pub j_final: u32,
    pub v: i64,
    pub v_final: i64,
    pub j_max: u32,
}

impl ChannelHeader {
    pub fn new(k: f64, j: u32, j_final: u32, j_max: u32) -> Self {
        Self {
            energy_label: String::new(),
            k,
            length_unit: "A".into(),
            j,
            j_final,
            v: 0,
            v_final: 0,
            j_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::Validation(format!("wavenumber k must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

/// Key of one S-matrix element: total J, initial helicity Ω, final helicity Ω'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntryKey {
    pub j: u32,
    pub omega: i32,
    pub omega_prime: i32,
}

/// Sparse S^J_{Ω'Ω} for one channel; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrixBlock {
    header: ChannelHeader,
    entries: BTreeMap<EntryKey, Complex64>,
}

impl SMatrixBlock {
    /// Builds a block, enforcing the helicity and J bounds and key uniqueness.
    pub fn new<I>(header: ChannelHeader, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, i32, i32, Complex64)>,
    {
        header.validate()?;
        let mut block = Self {
            header,
            entries: BTreeMap::new(),
        };
        for (j, omega, omega_prime, s) in entries {
            block.insert(EntryKey { j, omega, omega_prime }, s)?;
        }
        Ok(block)
    }

    fn insert(&mut self, key: EntryKey, s: Complex64) -> Result<()> {
        let h = &self.header;
        if key.j > h.j_max {
            return Err(Error::Validation(format!(
                "entry (J={}, Ω={}, Ω'={}): J exceeds Jmax={}",
                key.j, key.omega, key.omega_prime, h.j_max
            )));
        }
        let lim = key.j.min(h.j) as i64;
        if (key.omega as i64).abs() > lim {
            return Err(Error::Validation(format!(
                "entry (J={}, Ω={}, Ω'={}): |Ω|={} > min(J={}, j={})",
                key.j,
                key.omega,
                key.omega_prime,
                key.omega.abs(),
                key.j,
                h.j
            )));
        }
        let lim = key.j.min(h.j_final) as i64;
        if (key.omega_prime as i64).abs() > lim {
            return Err(Error::Validation(format!(
                "entry (J={}, Ω={}, Ω'={}): |Ω'|={} > min(J={}, j'={})",
                key.j,
                key.omega,
                key.omega_prime,
                key.omega_prime.abs(),
                key.j,
                h.j_final
            )));
        }
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::Validation(format!(
                "entry (J={}, Ω={}, Ω'={}) is not finite",
                key.j, key.omega, key.omega_prime
            )));
        }
        if self.entries.insert(key, s).is_some() {
            return Err(Error::Validation(format!(
                "duplicate entry (J={}, Ω={}, Ω'={})",
                key.j, key.omega, key.omega_prime
            )));
        }
        Ok(())
    }

    pub fn header(&self) -> &ChannelHeader {
        &self.header
    }

    pub fn k(&self) -> f64 {
        self.header.k
    }

    pub fn j_max(&self) -> u32 {
        self.header.j_max
    }

    /// S^J_{Ω'Ω}, zero when absent.
    pub fn get(&self, j: u32, omega_prime: i32, omega: i32) -> Complex64 {
        self.entries
            .get(&EntryKey { j, omega, omega_prime })
            .copied()
            .unwrap_or_default()
    }

    pub fn contains(&self, j: u32, omega_prime: i32, omega: i32) -> bool {
        self.entries.contains_key(&EntryKey { j, omega, omega_prime })
    }

    pub fn entries(&self) -> impl Iterator<Item = (EntryKey, Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct (Ω', Ω) pairs that have at least one entry, in sorted order.
    pub fn helicity_pairs(&self) -> Vec<(i32, i32)> {
        let mut pairs: Vec<(i32, i32)> = self.entries.keys().map(|k| (k.omega_prime, k.omega)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// S^J_{Ω'Ω} for J = 0..=J_max (zeros where absent).
    pub fn column(&self, omega_prime: i32, omega: i32) -> Vec<Complex64> {
        (0..=self.j_max()).map(|j| self.get(j, omega_prime, omega)).collect()
    }

    /// Same block with every entry transformed by `f`.
    pub fn map_entries(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            header: self.header.clone(),
            entries: self.entries.iter().map(|(k, v)| (*k, f(*v))).collect(),
        }
    }

    /// Same block with explicit zeros filled in for every allowed key not present.
    pub fn with_explicit_zeros(&self) -> Self {
        let mut out = self.clone();
        let h = &self.header;
        for j in 0..=h.j_max {
            let lo = j.min(h.j) as i32;
            let lop = j.min(h.j_final) as i32;
            for omega in -lo..=lo {
                for omega_prime in -lop..=lop {
                    out.entries
                        .entry(EntryKey { j, omega, omega_prime })
                        .or_insert(Complex64::new(0.0, 0.0));
                }
            }
        }
        out
    }

    /// Writes the text format; floats use the shortest round-trip form.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut s = String::new();
        if !h.energy_label.is_empty() {
            let _ = writeln!(s, "# energy: {}", h.energy_label);
        }
        let _ = writeln!(s, "k {} {}^-1", h.k, h.length_unit);
        let _ = writeln!(
            s,
            "channel j={} jp={} v={} vp={} Jmax={}",
            h.j, h.j_final, h.v, h.v_final, h.j_max
        );
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{} {} {} {} {}", k.j, k.omega, k.omega_prime, v.re, v.im);
        }
        s
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from '{tok}'")))
}

fn parse_channel(rest: &str, line: usize) -> Result<(u32, u32, i64, i64, u32)> {
    let (mut j, mut jp, mut v, mut vp, mut jmax) = (None, None, None, None, None);
    for tok in rest.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, got '{tok}'")))?;
        match key {
            "j" => j = Some(parse_num(val, "j", line)?),
            "jp" => jp = Some(parse_num(val, "jp", line)?),
            "v" => v = Some(parse_num(val, "v", line)?),
            "vp" => vp = Some(parse_num(val, "vp", line)?),
            "Jmax" => jmax = Some(parse_num(val, "Jmax", line)?),
            other => return Err(parse_err(line, format!("unknown channel field '{other}'"))),
        }
    }
    fn need<T>(o: Option<T>, name: &str, line: usize) -> Result<T> {
        o.ok_or_else(|| parse_err(line, format!("channel line lacks {name}=")))
    }
    Ok((
        need(j, "j", line)?,
        need(jp, "jp", line)?,
        need(v, "v", line)?,
        need(vp, "vp", line)?,
        need(jmax, "Jmax", line)?,
    ))
}

/// Parses the S-matrix text format.
pub fn load_smatrix<R: BufRead>(source: R) -> Result<SMatrixBlock> {
    let mut energy_label = String::new();
    let mut k_line: Option<(f64, String)> = None;
    let mut block: Option<SMatrixBlock> = None;

    for (idx, raw) in source.lines().enumerate() {
        let lineno = idx + 1;
        let raw = raw?;
        let (content, comment) = match raw.split_once('#') {
            Some((c, m)) => (c, Some(m)),
            None => (raw.as_str(), None),
        };
        if let Some(m) = comment {
            if let Some(label) = m.trim().strip_prefix("energy:") {
                if block.is_none() {
                    energy_label = label.trim().to_string();
                }
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();

        if k_line.is_none() {
            if toks[0] != "k" || !(2..=3).contains(&toks.len()) {
                return Err(parse_err(lineno, "expected 'k <value> <unit-tag>'"));
            }
            let k = parse_num(toks[1], "k", lineno)?;
            // The tag names the length unit; `A` and `A^-1` are both accepted.
            let unit = toks.get(2).map_or("A", |u| u.strip_suffix("^-1").unwrap_or(u)).to_string();
            k_line = Some((k, unit));
            continue;
        }

        let Some(b) = block.as_mut() else {
            let rest = content
                .strip_prefix("channel")
                .ok_or_else(|| parse_err(lineno, "expected 'channel j=.. jp=.. v=.. vp=.. Jmax=..'"))?;
            let (j, j_final, v, v_final, j_max) = parse_channel(rest, lineno)?;
            let (k, length_unit) = k_line.clone().unwrap();
            let header = ChannelHeader {
                energy_label: energy_label.clone(),
                k,
                length_unit,
                j,
                j_final,
                v,
                v_final,
                j_max,
            };
            block = Some(SMatrixBlock::new(header, std::iter::empty())?);
            continue;
        };

        if toks.len() != 5 {
            return Err(parse_err(
                lineno,
                format!("expected '<J> <Omega> <OmegaPrime> <Re> <Im>', got {} fields", toks.len()),
            ));
        }
        let j: u32 = parse_num(toks[0], "J", lineno)?;
        let omega: i32 = parse_num(toks[1], "Omega", lineno)?;
        let omega_prime: i32 = parse_num(toks[2], "OmegaPrime", lineno)?;
        let re: f64 = parse_num(toks[3], "Re", lineno)?;
        let im: f64 = parse_num(toks[4], "Im", lineno)?;
        b.insert(EntryKey { j, omega, omega_prime }, Complex64::new(re, im))
            .map_err(|e| match e {
                Error::Validation(m) => Error::Validation(format!("line {lineno}: {m}")),
                other => other,
            })?;
    }

    block.ok_or_else(|| parse_err(0, "missing k or channel header"))
}

pub fn load_smatrix_str(text: &str) -> Result<SMatrixBlock> {
    load_smatrix(text.as_bytes())
}

/// One entry whose magnitude exceeds the flux bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityViolation {
    pub key: EntryKey,
    pub magnitude: f64,
}

/// Per-entry flux check; an empty report means every |S| ≤ 1 + 1e-9.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnitarityReport {
    pub violations: Vec<UnitarityViolation>,
}

impl UnitarityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const UNITARITY_TOL: f64 = 1e-9;

pub fn validate_unitarity(block: &SMatrixBlock) -> UnitarityReport {
    let violations = block
        .entries()
        .filter_map(|(key, s)| {
            let magnitude = s.norm();
            (magnitude > 1.0 + UNITARITY_TOL).then_some(UnitarityViolation { key, magnitude })
        })
        .collect();
    UnitarityReport { violations }
}
