//! Ordinals below ε₀ in Cantor normal form.
//!
//! An [`Ordinal`] is a strictly decreasing sum `ω^e₁·c₁ + … + ω^eₖ·cₖ` whose
//! exponents are themselves ordinals. Coefficients are arbitrary-precision.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Default cap on CNF nesting depth.
pub const DEFAULT_DEPTH_CAP: usize = 64;

/// Errors raised by ordinal operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OrdinalError {
    /// `left_subtract(a, b)` with `a > b`.
    #[error("left subtraction underflow")]
    Underflow,
    /// The result would nest deeper than the configured cap.
    #[error("CNF depth {depth} exceeds cap {cap}")]
    DepthExceeded {
        /// Depth the operation would produce.
        depth: usize,
        /// Active cap.
        cap: usize,
    },
    /// `ell` or `big_l` applied to zero.
    #[error("argument must be positive")]
    ZeroArgument,
    /// Index outside the permitted range.
    #[error("argument out of range")]
    OutOfRange,
    /// Parameters violate their invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    /// The value cannot be written below ε₀.
    #[error("not representable below epsilon_0")]
    NotationSupport,
    /// Malformed ordinal text.
    #[error("syntax error at {pos}: {msg}")]
    Syntax {
        /// Byte offset of the error.
        pos: usize,
        /// Description.
        msg: &'static str,
    },
}

/// An ordinal below ε₀.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, BigUint)>,
}

impl Ordinal {
    /// The ordinal 0.
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    /// The ordinal 1.
    pub fn one() -> Self {
        Self::from_u64(1)
    }

    /// The ordinal ω.
    pub fn omega() -> Self {
        Ordinal {
            terms: vec![(Self::one(), BigUint::one())],
        }
    }

    /// A finite ordinal.
    pub fn from_u64(n: u64) -> Self {
        Self::nat(BigUint::from(n))
    }

    /// A finite ordinal from a big natural.
    pub fn nat(n: BigUint) -> Self {
        if n.is_zero() {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![(Self::zero(), n)],
            }
        }
    }

    /// The single term `ω^e·c`.
    pub fn term(e: Ordinal, c: u64) -> Self {
        Self::term_big(e, BigUint::from(c))
    }

    /// The single term `ω^e·c` with a big coefficient.
    pub fn term_big(e: Ordinal, c: BigUint) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// CNF terms, highest exponent first.
    pub fn terms(&self) -> &[(Ordinal, BigUint)] {
        &self.terms
    }

    /// Builds an ordinal from an arbitrary sequence of `(exponent, coefficient)`
    /// summands, read left to right.
    pub fn normalize(raw: Vec<(Ordinal, BigUint)>) -> Self {
        raw.into_iter()
            .fold(Self::zero(), |acc, (e, c)| acc.add(&Self::term_big(e, c)))
    }

    /// True for 0.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for finite ordinals.
    pub fn is_finite(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [(e, _)] => e.is_zero(),
            _ => false,
        }
    }

    /// The value as `u64` if finite and small enough.
    pub fn to_u64(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => c.to_u64(),
            _ => None,
        }
    }

    /// True for successor ordinals.
    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some((e, _)) if e.is_zero())
    }

    /// True for limit ordinals (nonzero, not successor).
    pub fn is_limit(&self) -> bool {
        !self.is_zero() && !self.is_successor()
    }

    /// CNF nesting depth; 0 has depth 0 and naturals depth 1.
    pub fn depth(&self) -> usize {
        self.terms
            .iter()
            .map(|(e, _)| e.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    /// `self + 1`.
    pub fn succ(&self) -> Self {
        self.add(&Self::one())
    }

    /// The predecessor of a successor ordinal.
    pub fn pred(&self) -> Option<Self> {
        if !self.is_successor() {
            return None;
        }
        let mut t = self.terms.clone();
        let last = t.len() - 1;
        if t[last].1.is_one() {
            t.pop();
        } else {
            t[last].1 -= 1u32;
        }
        Some(Ordinal { terms: t })
    }

    /// Ordinal sum `self + b`.
    pub fn add(&self, b: &Ordinal) -> Ordinal {
        let Some((e, c)) = b.terms.first() else {
            return self.clone();
        };
        let mut out: Vec<(Ordinal, BigUint)> = Vec::with_capacity(self.terms.len() + b.terms.len());
        let mut merged = c.clone();
        for (ae, ac) in &self.terms {
            match ae.cmp(e) {
                Ordering::Greater => out.push((ae.clone(), ac.clone())),
                Ordering::Equal => {
                    merged += ac;
                    break;
                }
                Ordering::Less => break,
            }
        }
        out.push((e.clone(), merged));
        out.extend(b.terms[1..].iter().cloned());
        Ordinal { terms: out }
    }

    /// The unique `γ` with `self + γ = b`.
    pub fn left_subtract(&self, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
        if self > b {
            return Err(OrdinalError::Underflow);
        }
        for (i, bt) in b.terms.iter().enumerate() {
            match self.terms.get(i) {
                None => {
                    return Ok(Ordinal {
                        terms: b.terms[i..].to_vec(),
                    })
                }
                Some(at) if at == bt => continue,
                Some((ae, ac)) => {
                    let (be, bc) = bt;
                    let mut out = Vec::with_capacity(b.terms.len() - i);
                    if ae == be {
                        out.push((be.clone(), bc - ac));
                    } else {
                        out.push(bt.clone());
                    }
                    out.extend(b.terms[i + 1..].iter().cloned());
                    return Ok(Ordinal { terms: out });
                }
            }
        }
        Ok(Ordinal::zero())
    }

    /// Ordinal product `self · b`.
    pub fn multiply(&self, b: &Ordinal) -> Ordinal {
        let Some((lead, lc)) = self.terms.first() else {
            return Ordinal::zero();
        };
        let mut out = Vec::new();
        for (e, c) in &b.terms {
            if e.is_zero() {
                out.push((lead.clone(), lc * c));
                out.extend(self.terms[1..].iter().cloned());
            } else {
                out.push((lead.add(e), c.clone()));
            }
        }
        Ordinal { terms: out }
    }

    /// `self · n` for a natural `n`.
    pub fn mul_nat(&self, n: u64) -> Ordinal {
        self.multiply(&Ordinal::from_u64(n))
    }

    /// Last CNF exponent (the end-logarithm); `ℓ(0) = 0` by convention.
    pub fn ell_or_zero(&self) -> Ordinal {
        self.terms.last().map(|(e, _)| e.clone()).unwrap_or_default()
    }

    /// Coefficient of the last CNF term (0 for 0).
    pub fn last_coef(&self) -> BigUint {
        self.terms
            .last()
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    /// Coefficient of `ω^e` in the CNF (possibly 0).
    pub fn coef_at(&self, e: &Ordinal) -> BigUint {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    /// The `x'` with `self = x' + ω^{ℓ(self)}`; 0 for 0.
    pub fn prefix(&self) -> Ordinal {
        let mut t = self.terms.clone();
        if let Some(last) = t.last_mut() {
            if last.1.is_one() {
                t.pop();
            } else {
                last.1 -= 1u32;
            }
        }
        Ordinal { terms: t }
    }

    /// The sum of the CNF terms with exponent below `e`.
    pub fn mod_omega_pow(&self, e: &Ordinal) -> Ordinal {
        Ordinal {
            terms: self.terms.iter().filter(|(x, _)| x < e).cloned().collect(),
        }
    }

    /// The sum of the CNF terms with exponent at least `e`.
    pub fn div_part(&self, e: &Ordinal) -> Ordinal {
        Ordinal {
            terms: self.terms.iter().filter(|(x, _)| x >= e).cloned().collect(),
        }
    }

    /// The `q` with `self = ω·q + k`, `k` finite.
    pub fn div_omega(&self) -> Ordinal {
        let one = Ordinal::one();
        Ordinal {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| !e.is_zero())
                .map(|(e, c)| (one.left_subtract(e).expect("e >= 1"), c.clone()))
                .collect(),
        }
    }

    /// The finite `k` with `self = ω·q + k`.
    pub fn finite_part(&self) -> BigUint {
        match self.terms.last() {
            Some((e, c)) if e.is_zero() => c.clone(),
            _ => BigUint::zero(),
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.0.cmp(&b.0) {
                Ordering::Equal => {}
                o => return o,
            }
            match a.1.cmp(&b.1) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::from_u64(n)
    }
}

/// See [`Ordinal::normalize`].
pub fn normalize(raw: Vec<(Ordinal, BigUint)>) -> Ordinal {
    Ordinal::normalize(raw)
}

/// Total order on ordinals.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

/// Ordinal sum.
pub fn add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    a.add(b)
}

/// The unique `γ` with `a + γ = b`.
pub fn left_subtract(a: &Ordinal, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
    a.left_subtract(b)
}

/// Ordinal product.
pub fn multiply(a: &Ordinal, b: &Ordinal) -> Ordinal {
    a.multiply(b)
}

/// `ω^a` under the default depth cap.
pub fn omega_pow(a: &Ordinal) -> Result<Ordinal, OrdinalError> {
    omega_pow_capped(a, DEFAULT_DEPTH_CAP)
}

/// `ω^a`, failing if the result nests deeper than `cap`.
pub fn omega_pow_capped(a: &Ordinal, cap: usize) -> Result<Ordinal, OrdinalError> {
    let depth = a.depth() + 1;
    if depth > cap {
        return Err(OrdinalError::DepthExceeded { depth, cap });
    }
    Ok(Ordinal {
        terms: vec![(a.clone(), BigUint::one())],
    })
}

/// `e(a) = -1 + ω^a`.
pub fn e(a: &Ordinal) -> Result<Ordinal, OrdinalError> {
    let p = omega_pow(a)?;
    Ok(Ordinal::one().left_subtract(&p).expect("omega^a >= 1"))
}

/// `e` iterated `n` times.
pub fn e_iter(n: u64, a: &Ordinal) -> Result<Ordinal, OrdinalError> {
    let mut x = a.clone();
    for _ in 0..n {
        x = e(&x)?;
    }
    Ok(x)
}

/// End-logarithm: the last CNF exponent.
pub fn ell(a: &Ordinal) -> Result<Ordinal, OrdinalError> {
    a.terms
        .last()
        .map(|(e, _)| e.clone())
        .ok_or(OrdinalError::ZeroArgument)
}

/// Initial logarithm: the first CNF exponent.
pub fn big_l(a: &Ordinal) -> Result<Ordinal, OrdinalError> {
    a.terms
        .first()
        .map(|(e, _)| e.clone())
        .ok_or(OrdinalError::ZeroArgument)
}

/// `ℓ^xi(a)`, iterating the end-logarithm with `ℓ(0) = 0`.
///
/// Infinite `xi` yields 0, since the iteration reaches 0 after finitely many
/// steps.
pub fn ell_iter(xi: &Ordinal, a: &Ordinal) -> Ordinal {
    match xi.to_u64() {
        Some(n) => ell_iter_n(n, a),
        None => Ordinal::zero(),
    }
}

/// `ℓ^n(a)` for a natural `n`.
pub fn ell_iter_n(n: u64, a: &Ordinal) -> Ordinal {
    let mut x = a.clone();
    for _ in 0..n {
        if x.is_zero() {
            break;
        }
        x = x.ell_or_zero();
    }
    x
}

/// `£(a)`: writing `a = ω·(1+α₀) + k`, returns `α₀`; 0 when `a ≤ ω`.
pub fn pounds(a: &Ordinal) -> Ordinal {
    let q = a.div_omega();
    if q.is_zero() {
        return Ordinal::zero();
    }
    Ordinal::one().left_subtract(&q).expect("q >= 1")
}

/// True iff `a = ω^β` for some `β`.
pub fn is_add_indec(a: &Ordinal) -> bool {
    matches!(a.terms.as_slice(), [(_, c)] if c.is_one())
}

/// True iff `a = 1` or `a = ω^(ω^ρ)`.
pub fn is_mult_indec(a: &Ordinal) -> bool {
    match a.terms.as_slice() {
        [(e, c)] if c.is_one() => e.is_zero() || is_add_indec(e),
        _ => false,
    }
}

/// Parameters of a characteristic sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharSeqParams {
    /// 1 or a multiplicatively indecomposable limit.
    pub varsigma: Ordinal,
    /// Multiplier of the limit part.
    pub nu: Ordinal,
}

impl CharSeqParams {
    /// Validates `varsigma`.
    pub fn new(varsigma: Ordinal, nu: Ordinal) -> Result<Self, OrdinalError> {
        if varsigma != Ordinal::one() && !(is_mult_indec(&varsigma) && varsigma.is_limit()) {
            return Err(OrdinalError::InvalidParams(
                "varsigma must be 1 or multiplicatively indecomposable",
            ));
        }
        Ok(CharSeqParams { varsigma, nu })
    }
}

/// The `iota`-th entry of the characteristic sequence: `ν·ι₀ + k` for
/// `iota = ω·ι₀ + k`, and constantly 0 when `varsigma = 1`.
pub fn char_seq(params: &CharSeqParams, iota: &Ordinal) -> Result<Ordinal, OrdinalError> {
    if params.varsigma == Ordinal::one() {
        return Ok(Ordinal::zero());
    }
    if iota >= &params.varsigma {
        return Err(OrdinalError::OutOfRange);
    }
    let ml = params.nu.multiply(&iota.div_omega());
    Ok(ml.add(&Ordinal::nat(iota.finite_part())))
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            f.write_str("w")?;
            if *e != Ordinal::one() {
                if e.is_finite() || *e == Ordinal::omega() {
                    write!(f, "^{e}")?;
                } else {
                    write!(f, "^({e})")?;
                }
            }
            if !c.is_one() {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses the textual ordinal grammar (`w^(w^2*3+1)*2+w+5`).
pub fn parse(s: &str) -> Result<Ordinal, OrdinalError> {
    let mut p = Parser::new(s);
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Recursive-descent parser over the ordinal grammar, reusable by callers that
/// embed ordinals in larger languages.
pub struct Parser<'a> {
    src: &'a [u8],
    /// Current byte offset.
    pub pos: usize,
}

impl<'a> Parser<'a> {
    /// Starts parsing at the beginning of `s`.
    pub fn new(s: &'a str) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    /// Starts parsing `s` at byte offset `pos`.
    pub fn at(s: &'a str, pos: usize) -> Self {
        Parser {
            src: s.as_bytes(),
            pos,
        }
    }

    fn err(&self, msg: &'static str) -> OrdinalError {
        OrdinalError::Syntax { pos: self.pos, msg }
    }

    /// Skips ASCII whitespace.
    pub fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    /// Parses a sum of products.
    pub fn expr(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            let t = self.product()?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let t = self.power()?;
            acc = acc.multiply(&t);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Ordinal, OrdinalError> {
        let start = self.pos;
        let (base, is_w) = self.primary()?;
        if self.peek() == Some(b'^') {
            if !is_w {
                self.pos = start;
                return Err(self.err("only w may be raised to a power"));
            }
            self.pos += 1;
            let ex = self.power()?;
            return omega_pow(&ex);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<(Ordinal, bool), OrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok((Ordinal::omega(), true))
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok((v, false))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let n = BigUint::parse_bytes(digits.as_bytes(), 10).expect("digits");
                Ok((Ordinal::nat(n), false))
            }
            Some(_) => Err(self.err("expected ordinal")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str> as serde::Deserialize>::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Renders an ordinal as canonical CNF text.
pub fn print(a: &Ordinal) -> String {
    use alloc::string::ToString;
    a.to_string()
}

/// A finite set of ordinals below `a` that includes small values and points
/// close to `a` from below; used to probe neighbourhoods.
pub fn below_samples(a: &Ordinal, width: u64, depth: u32) -> Vec<Ordinal> {
    let mut out = Vec::new();
    for n in 0..width.min(a.to_u64().unwrap_or(u64::MAX)) {
        out.push(Ordinal::from_u64(n));
    }
    if !a.is_finite() {
        let p = a.prefix();
        let mu = a.ell_or_zero();
        if !p.is_zero() {
            out.push(p.clone());
        }
        if depth > 0 {
            let inner: Vec<Ordinal> = if let Some(m) = mu.pred() {
                vec![m]
            } else {
                below_samples(&mu, 2, depth - 1)
                    .into_iter()
                    .rev()
                    .take(3)
                    .collect()
            };
            for nu in inner {
                for k in 1..=width {
                    out.push(p.add(&Ordinal::term(nu.clone(), k)));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out.retain(|x| x < a);
    out
}
