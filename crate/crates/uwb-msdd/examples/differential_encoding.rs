//! Code book, bit mapping, and differential space-time encoding.
//!
//! Run with: `cargo run --release -p uwb-msdd --example differential_encoding`

use uwb_msdd::stc::{
    diff_encode, map_bits_to_symbol, product_of_symbols, symbol_to_bits, CodeMatrix, DiffMatrix,
};

fn show(m: [[i32; 2]; 2]) -> String {
    format!("[{:2} {:2}; {:2} {:2}]", m[0][0], m[0][1], m[1][0], m[1][1])
}

fn main() {
    println!("code book (bit pair -> unitary matrix):");
    for b1 in 0..2u8 {
        for b2 in 0..2u8 {
            let u = map_bits_to_symbol(b1, b2);
            println!("  {b1}{b2} -> U^{} = {}", u.index(), show(u.entries()));
            assert_eq!(symbol_to_bits(u), (b1, b2));
        }
    }

    // The code book is closed under multiplication (a cyclic group of
    // order four), so any product of information symbols is again a member.
    let u2 = CodeMatrix::from_index(2).unwrap();
    let prod = product_of_symbols(&[u2, u2]);
    println!("\nU^2 * U^2 = U^{} = {}", prod.index(), show(prod.entries()));

    // Differential encoding from the reference matrix.
    let bits = [(0, 1), (1, 0), (1, 1), (0, 0), (1, 0)];
    let syms: Vec<CodeMatrix> = bits.iter().map(|&(a, b)| map_bits_to_symbol(a, b)).collect();
    let d = diff_encode(&syms, DiffMatrix::reference()).unwrap();
    println!("\ndifferentially encoded transmit matrices:");
    for (i, m) in d.iter().enumerate() {
        println!("  D_{i} = {}", show(m.entries()));
    }

    // The pairwise identity the receiver exploits: D_i D_{i-m}' equals twice
    // the product of the intervening information symbols, exactly.
    for i in 1..=syms.len() {
        for m in 1..=i {
            let lhs = d[i].times_transpose(d[i - m]);
            let p = product_of_symbols(&syms[i - m..i]).entries();
            assert_eq!(lhs, [[2 * p[0][0], 2 * p[0][1]], [2 * p[1][0], 2 * p[1][1]]]);
        }
    }
    println!("\npairwise differential identity verified for all lags");
}
