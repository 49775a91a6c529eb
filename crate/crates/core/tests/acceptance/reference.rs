//! Published reference figures, rows in `BenchmarkId::ALL` order and
//! columns small, medium, large.

/// (scalar cycles, vector cycles, speedup)
pub const CYCLES: [[(f64, f64, f64); 3]; 9] = [
    [(3.4e3, 5.0e1, 69.6), (2.7e4, 3.5e2, 77.3), (2.2e5, 2.8e3, 78.4)],
    [(3.5e3, 5.0e1, 69.5), (2.8e4, 3.6e2, 77.3), (2.2e5, 2.8e3, 78.3)],
    [(1.6e3, 6.2e1, 25.2), (1.2e4, 3.8e2, 32.1), (9.8e4, 3.0e3, 33.2)],
    [(1.4e3, 4.2e1, 32.6), (1.1e4, 2.2e2, 48.1), (8.6e4, 1.7e3, 51.2)],
    [(1.4e3, 4.2e1, 34.0), (1.1e4, 2.9e2, 38.4), (9.0e4, 2.3e3, 39.0)],
    [(2.2e4, 5.1e3, 43.8), (1.4e7, 2.0e5, 71.6), (9.1e8, 1.2e7, 77.6)],
    [(1.2e7, 5.1e5, 24.1), (6.1e9, 1.2e8, 50.4), (3.1e12, 5.3e10, 58.6)],
    [(3.7e5, 7.0e4, 5.4), (2.4e7, 4.4e6, 5.4), (1.5e9, 2.8e8, 5.4)],
    [(1.4e9, 7.3e8, 1.9), (1.9e9, 1.2e9, 1.6), (2.4e9, 1.8e9, 1.4)],
];

/// (scalar joules, vector joules, energy ratio in percent)
pub const ENERGY: [[(f64, f64, f64); 3]; 9] = [
    [(8.6e-6, 1.4e-7, 1.6), (6.8e-5, 9.7e-7, 1.4), (5.44e-4, 7.6e-6, 1.4)],
    [(8.5e-6, 1.3e-7, 1.6), (6.9e-5, 9.6e-7, 1.4), (5.3e-4, 7.5e-6, 1.4)],
    [(3.8e-6, 1.7e-7, 4.4), (3.0e-5, 1.0e-6, 3.4), (2.4e-4, 8.0e-6, 3.3)],
    [(3.4e-6, 1.1e-7, 3.4), (2.6e-5, 6.1e-7, 2.3), (2.1e-4, 4.5e-6, 2.1)],
    [(3.5e-6, 1.1e-7, 3.2), (2.8e-5, 7.9e-7, 2.9), (2.2e-4, 6.2e-6, 2.8)],
    [(5.52e-4, 1.4e-5, 2.5), (3.5e-2, 5.4e-4, 1.5), (2.2e0, 3.2e-2, 1.4)],
    [(3.0e-2, 1.4e-3, 4.6), (1.5e1, 3.3e-1, 2.2), (7.6e3, 1.4e2, 1.9)],
    [(9.2e-4, 1.88e-4, 20.5), (5.9e-2, 1.2e-2, 20.4), (3.8e0, 7.65e-1, 20.4)],
    [(3.4e0, 1.9e0, 57.3), (4.5e0, 3.2e0, 70.4), (6.0e0, 6.7e0, 79.9)],
];
