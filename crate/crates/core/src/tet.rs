//! Edge-slot conventions for a single tetrahedron with vertices 0..4.
//!
//! Slot `s` and slot `s + 3` are opposite edges, so the three quads are the
//! slot pairs `(0, 3)`, `(1, 4)`, `(2, 5)`. Face `f` is the face opposite
//! vertex `f`.

/// Endpoints of each edge slot.
pub const EDGE_VERTICES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (1, 3), (1, 2)];

/// For each vertex, the three slots of edges incident to it.
pub const VERTEX_SLOTS: [[usize; 3]; 4] = [[0, 1, 2], [0, 4, 5], [1, 3, 5], [2, 3, 4]];

/// Slot of edge `ij` for the lexicographic order `(12, 13, 14, 23, 24, 34)`.
pub const LEX_TO_SLOT: [usize; 6] = [0, 1, 2, 5, 4, 3];

pub const fn opposite(slot: usize) -> usize {
    (slot + 3) % 6
}

pub const fn quad_of(slot: usize) -> usize {
    slot % 3
}

/// Slot joining two distinct vertices.
pub fn slot_of(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    EDGE_VERTICES
        .iter()
        .position(|&e| e == (a, b))
        .unwrap_or_else(|| panic!("no edge between vertices {u} and {v}"))
}

/// Vertices of face `f`, in increasing order.
pub fn face_vertices(f: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut n = 0;
    for v in 0..4 {
        if v != f {
            out[n] = v;
            n += 1;
        }
    }
    out
}

/// Reorders a vector given in lexicographic edge order into slot order.
pub fn from_lex(lex: [f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, &s) in LEX_TO_SLOT.iter().enumerate() {
        out[s] = lex[i];
    }
    out
}

/// Inverse of [`from_lex`].
pub fn to_lex(slots: [f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, &s) in LEX_TO_SLOT.iter().enumerate() {
        out[i] = slots[s];
    }
    out
}
