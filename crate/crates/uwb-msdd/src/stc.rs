//! Codebook, bit mapping and differential space-time encoding.
//!
//! The two-antenna code book holds four real orthogonal 2x2 matrices.  Every
//! member is unitary (`U Uᵀ = I`) and the set is closed under multiplication:
//! it is the cyclic group of order four generated by the rotation
//! `R = [[0, 1], [-1, 0]]`.  That group structure is what makes
//! multiple-symbol metrics cheap: any product of information symbols is again
//! a code-book member and is represented here by its exponent of `R`.
//!
//! All arithmetic in this module is exact integer arithmetic, so the
//! differential identities are tested with equality rather than tolerances.
//!
//! Indexing convention: information symbols are `U_1 ... U_N`; the known
//! reference matrix `D_0` precedes them, so `diff_encode` returns `N + 1`
//! transmit matrices `D_0 ... D_N` for `N` input symbols.

use crate::error::Error;

/// Exponent-of-`R` lookup for each code-book index `f`.
///
/// `U^0 = R^0 = I`, `U^1 = R^2 = -I`, `U^2 = R^1`, `U^3 = R^3 = -R`.
const INDEX_TO_EXPONENT: [u8; 4] = [0, 2, 1, 3];

/// Inverse of [`INDEX_TO_EXPONENT`] (the mapping happens to be an involution).
const EXPONENT_TO_INDEX: [u8; 4] = [0, 2, 1, 3];

/// Integer entries of the four code-book matrices, indexed by `f`.
const CODEBOOK: [[[i32; 2]; 2]; 4] = [
    [[1, 0], [0, 1]],
    [[-1, 0], [0, -1]],
    [[0, 1], [-1, 0]],
    [[0, -1], [1, 0]],
];

/// One information-bearing space-time symbol from the code book.
///
/// Stored as its code-book index `f in 0..4`; the bit pair, the integer
/// matrix and the group exponent are all derived views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeMatrix {
    f: u8,
}

impl CodeMatrix {
    /// Number of code-book members.
    pub const COUNT: usize = 4;

    /// The identity symbol (bit pair `00`).
    pub const IDENTITY: CodeMatrix = CodeMatrix { f: 0 };

    /// Symbol from its code-book index `f in 0..4`.
    pub fn from_index(f: usize) -> Result<Self, Error> {
        if f < Self::COUNT {
            Ok(Self { f: f as u8 })
        } else {
            Err(Error::invalid_input(format!("code-book index {f} out of range 0..4")))
        }
    }

    /// Code-book index `f`.
    pub fn index(self) -> usize {
        self.f as usize
    }

    /// All four code-book members in index order.
    pub fn all() -> [CodeMatrix; 4] {
        [0, 1, 2, 3].map(|f| CodeMatrix { f })
    }

    /// Maps a bit pair onto its code-book symbol: `00 -> U^0`, `01 -> U^1`,
    /// `10 -> U^2`, `11 -> U^3`.
    pub fn from_bits(b1: u8, b2: u8) -> Self {
        debug_assert!(b1 <= 1 && b2 <= 1);
        Self { f: (b1 << 1) | b2 }
    }

    /// Inverse of [`CodeMatrix::from_bits`].
    pub fn bits(self) -> (u8, u8) {
        (self.f >> 1, self.f & 1)
    }

    /// The `k`-th bit carried by this symbol, `k in {0, 1}`.
    pub fn bit(self, k: usize) -> u8 {
        debug_assert!(k < 2);
        if k == 0 {
            self.f >> 1
        } else {
            self.f & 1
        }
    }

    /// Exact integer entries of the 2x2 matrix.
    pub fn entries(self) -> [[i32; 2]; 2] {
        CODEBOOK[self.f as usize]
    }

    /// Exponent `e` such that this symbol equals `R^e`,
    /// `R = [[0, 1], [-1, 0]]`.
    pub fn exponent(self) -> u8 {
        INDEX_TO_EXPONENT[self.f as usize]
    }

    /// Symbol with the given exponent of `R` (taken mod 4).
    pub fn from_exponent(e: u8) -> Self {
        Self { f: EXPONENT_TO_INDEX[(e % 4) as usize] }
    }

    /// Group product; exact, stays inside the code book.
    pub fn mul(self, rhs: Self) -> Self {
        Self::from_exponent(self.exponent() + rhs.exponent())
    }

    /// Matrix transpose, which for these unitary members is the inverse.
    pub fn transpose(self) -> Self {
        Self::from_exponent((4 - self.exponent()) % 4)
    }

    /// Entries as floating point, for metric templates.
    pub fn entries_f64(self) -> [[f64; 2]; 2] {
        let e = self.entries();
        [[e[0][0] as f64, e[0][1] as f64], [e[1][0] as f64, e[1][1] as f64]]
    }
}

/// `map_bits_to_symbol` per the bit-pair mapping rule.
pub fn map_bits_to_symbol(b1: u8, b2: u8) -> CodeMatrix {
    CodeMatrix::from_bits(b1, b2)
}

/// `symbol_to_bits`, inverse of [`map_bits_to_symbol`].
pub fn symbol_to_bits(u: CodeMatrix) -> (u8, u8) {
    u.bits()
}

/// Ordered product of information symbols.
///
/// The code book is closed under multiplication, so the result is again a
/// code-book member (a signed permutation matrix).  The empty product is the
/// identity.
pub fn product_of_symbols(symbols: &[CodeMatrix]) -> CodeMatrix {
    symbols.iter().fold(CodeMatrix::IDENTITY, |acc, &u| acc.mul(u))
}

/// A differentially encoded transmit matrix `D_i`.
///
/// Rows index the transmit antenna `p`, columns the frame `n` within the
/// symbol; entry `(p, n)` of `D_i` is the pulse polarity of frame
/// `j = 2 i + n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffMatrix {
    e: [[i32; 2]; 2],
}

impl DiffMatrix {
    /// The reference matrix `D_0 = [[1, -1], [1, 1]]`.
    pub fn reference() -> Self {
        Self { e: [[1, -1], [1, 1]] }
    }

    /// Builds from explicit entries.
    pub fn from_entries(e: [[i32; 2]; 2]) -> Self {
        Self { e }
    }

    /// Integer entries, `entries()[p][n]`.
    pub fn entries(self) -> [[i32; 2]; 2] {
        self.e
    }

    /// `D Dᵀ`, exact.
    pub fn gram(self) -> [[i32; 2]; 2] {
        let d = self.e;
        let mut g = [[0i32; 2]; 2];
        for (r, row) in g.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = d[r][0] * d[c][0] + d[r][1] * d[c][1];
            }
        }
        g
    }

    /// Whether `D Dᵀ = 2 I`, the admission rule for a reference matrix.
    pub fn is_valid_reference(self) -> bool {
        self.gram() == [[2, 0], [0, 2]]
    }

    /// Right-multiplies by a code-book symbol: `D · U`.
    pub fn mul_symbol(self, u: CodeMatrix) -> Self {
        let d = self.e;
        let m = u.entries();
        let mut out = [[0i32; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = d[r][0] * m[0][c] + d[r][1] * m[1][c];
            }
        }
        Self { e: out }
    }

    /// `self · otherᵀ`, exact; with `self = D_i` and `other = D_{i-m}` this is
    /// `2 ∏ U_z` over the intervening information symbols.
    pub fn times_transpose(self, other: Self) -> [[i32; 2]; 2] {
        let a = self.e;
        let b = other.e;
        let mut out = [[0i32; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[c][0] + a[r][1] * b[c][1];
            }
        }
        out
    }
}

/// Differential encoding `D_i = D_{i-1} U_i`.
///
/// Returns `D_0 ... D_N` (length `symbols.len() + 1`).  `d0` must satisfy
/// `D_0 D_0ᵀ = 2 I`.
pub fn diff_encode(symbols: &[CodeMatrix], d0: DiffMatrix) -> Result<Vec<DiffMatrix>, Error> {
    if !d0.is_valid_reference() {
        return Err(Error::invalid_input(
            "reference matrix must satisfy D0 D0' = 2 I".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(symbols.len() + 1);
    out.push(d0);
    let mut cur = d0;
    for &u in symbols {
        cur = cur.mul_symbol(u);
        out.push(cur);
    }
    Ok(out)
}
