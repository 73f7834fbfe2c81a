#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subsat/rng.hpp"

namespace subsat {

/// Packed vector over GF(2). Coordinate access outside [0, size()) throws.
class BitVec {
public:
    BitVec() = default;

    explicit BitVec(std::size_t n) : len_(n), words_((n + 63) / 64, 0) {}

    static BitVec unit(std::size_t n, std::size_t i) {
        BitVec v(n);
        v.set(i, true);
        return v;
    }

    static BitVec random(std::size_t n, Rng& rng) {
        BitVec v(n);
        for (auto& w : v.words_) w = rng.next();
        v.trim();
        return v;
    }

    // Little-endian digit string: "101" has coordinate 0 = 1, 1 = 0, 2 = 1.
    static BitVec from_string(std::string_view bits) {
        BitVec v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1')
                v.set(i, true);
            else if (bits[i] != '0')
                throw std::invalid_argument("BitVec::from_string: expected '0' or '1'");
        }
        return v;
    }

    std::size_t size() const { return len_; }

    bool get(std::size_t i) const {
        check(i);
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    void set(std::size_t i, bool b) {
        check(i);
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (b)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void flip(std::size_t i) {
        check(i);
        words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
    }

    BitVec& operator^=(const BitVec& o) {
        if (o.len_ != len_) throw std::invalid_argument("BitVec xor: length mismatch");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
        return *this;
    }

    friend BitVec operator^(BitVec a, const BitVec& b) {
        a ^= b;
        return a;
    }

    /// Inner product over GF(2): parity of the AND.
    bool dot(const BitVec& o) const {
        if (o.len_ != len_) throw std::invalid_argument("BitVec dot: length mismatch");
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & o.words_[w];
        return std::popcount(acc) & 1;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    // Lowest set coordinate, or size() if none.
    std::size_t first_set() const {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w]) return w * 64 + std::countr_zero(words_[w]);
        return len_;
    }

    /// Copy with coordinate i removed (higher coordinates shift down).
    BitVec erased(std::size_t i) const {
        check(i);
        BitVec out(len_ - 1);
        for (std::size_t j = 0, o = 0; j < len_; ++j) {
            if (j == i) continue;
            if (get(j)) out.set(o, true);
            ++o;
        }
        return out;
    }

    /// Copy with value b inserted at coordinate i (old coordinates >= i shift up).
    BitVec inserted(std::size_t i, bool b) const {
        if (i > len_) throw std::out_of_range("BitVec::inserted");
        BitVec out(len_ + 1);
        for (std::size_t j = 0; j < i; ++j) out.set(j, get(j));
        out.set(i, b);
        for (std::size_t j = i; j < len_; ++j) out.set(j + 1, get(j));
        return out;
    }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    friend bool operator==(const BitVec& a, const BitVec& b) {
        return a.len_ == b.len_ && a.words_ == b.words_;
    }

    friend bool operator<(const BitVec& a, const BitVec& b) {
        if (a.len_ != b.len_) return a.len_ < b.len_;
        return a.words_ < b.words_;
    }

private:
    void check(std::size_t i) const {
        if (i >= len_) throw std::out_of_range("BitVec: coordinate out of range");
    }

    void trim() {
        if (len_ & 63) words_.back() &= (std::uint64_t{1} << (len_ & 63)) - 1;
    }

    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Affine linear form <coeffs, x> + constant over GF(2).
struct AffineForm {
    BitVec coeffs;
    bool constant = false;

    AffineForm() = default;
    explicit AffineForm(std::size_t n, bool c = false) : coeffs(n), constant(c) {}
    AffineForm(BitVec cs, bool c) : coeffs(std::move(cs)), constant(c) {}

    static AffineForm var(std::size_t n, std::size_t i) { return {BitVec::unit(n, i), false}; }
    static AffineForm one(std::size_t n) { return {BitVec(n), true}; }

    std::size_t n() const { return coeffs.size(); }
    bool eval(const BitVec& x) const { return coeffs.dot(x) ^ constant; }
    bool is_constant() const { return !coeffs.any(); }
    bool is_zero() const { return !coeffs.any() && !constant; }

    AffineForm& operator+=(const AffineForm& o) {
        coeffs ^= o.coeffs;
        constant ^= o.constant;
        return *this;
    }

    friend AffineForm operator+(AffineForm a, const AffineForm& b) {
        a += b;
        return a;
    }

    friend bool operator==(const AffineForm& a, const AffineForm& b) {
        return a.constant == b.constant && a.coeffs == b.coeffs;
    }
};

/// A list of affine forms, each read as the equation "form = 0".
struct LinearSystem {
    std::size_t n = 0;
    std::vector<AffineForm> rows;

    LinearSystem() = default;
    explicit LinearSystem(std::size_t vars) : n(vars) {}
    LinearSystem(std::size_t vars, std::vector<AffineForm> rs) : n(vars), rows(std::move(rs)) {
        for (const auto& r : rows)
            if (r.n() != n) throw std::invalid_argument("LinearSystem: row arity mismatch");
    }

    void add_row(AffineForm f) {
        if (f.n() != n) throw std::invalid_argument("LinearSystem: row arity mismatch");
        rows.push_back(std::move(f));
    }

    bool satisfied_by(const BitVec& x) const {
        for (const auto& r : rows)
            if (r.eval(x)) return false;
        return true;
    }

    friend bool operator==(const LinearSystem& a, const LinearSystem& b) {
        return a.n == b.n && a.rows == b.rows;
    }
};

struct Rref {
    LinearSystem reduced;             // nonzero rows only, fully reduced
    std::vector<std::size_t> pivots;  // pivot column of each row, strictly increasing

    std::size_t rank() const { return pivots.size(); }
};

/// Reduced row echelon form. Returns nullopt iff the system is inconsistent
/// (derives 0 = 1). Row space and constant column are preserved otherwise.
inline std::optional<Rref> rref(const LinearSystem& sys) {
    std::vector<AffineForm> rows = sys.rows;
    std::vector<std::size_t> pivots;
    std::size_t next = 0;  // first unprocessed row
    for (std::size_t col = 0; col < sys.n && next < rows.size(); ++col) {
        std::size_t pivot = rows.size();
        for (std::size_t r = next; r < rows.size(); ++r) {
            if (rows[r].coeffs.get(col)) {
                pivot = r;
                break;
            }
        }
        if (pivot == rows.size()) continue;
        std::swap(rows[next], rows[pivot]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != next && rows[r].coeffs.get(col)) rows[r] += rows[next];
        pivots.push_back(col);
        ++next;
    }
    for (std::size_t r = next; r < rows.size(); ++r)
        if (rows[r].constant) return std::nullopt;  // 0 = 1
    rows.resize(next);
    Rref out;
    out.reduced = LinearSystem(sys.n, std::move(rows));
    out.pivots = std::move(pivots);
    return out;
}

/// Nonempty affine subspace of F2^n, stored as a defining system in RREF.
/// Emptiness is rejected at construction, so holders never see an
/// inconsistent space.
class AffineSubspace {
public:
    enum class Implied { Zero, One, Free };

    struct Parameterization {
        BitVec particular;
        std::vector<BitVec> basis;  // kernel basis, one vector per free column
    };

    static std::optional<AffineSubspace> from_system(const LinearSystem& sys) {
        auto r = rref(sys);
        if (!r) return std::nullopt;
        AffineSubspace a;
        a.sys_ = std::move(r->reduced);
        a.pivots_ = std::move(r->pivots);
        return a;
    }

    static AffineSubspace full(std::size_t n) {
        AffineSubspace a;
        a.sys_ = LinearSystem(n);
        return a;
    }

    std::size_t n() const { return sys_.n; }
    std::size_t codim() const { return pivots_.size(); }
    std::size_t dim() const { return sys_.n - pivots_.size(); }
    const LinearSystem& system() const { return sys_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

    bool contains(const BitVec& x) const { return sys_.satisfied_by(x); }

    /// Residual of `f` after reduction by the defining rows: equal to `f`
    /// pointwise on the subspace, with all pivot coordinates cleared.
    AffineForm reduce(AffineForm f) const {
        if (f.n() != n()) throw std::invalid_argument("AffineSubspace::reduce: arity mismatch");
        for (std::size_t r = 0; r < sys_.rows.size(); ++r)
            if (f.coeffs.get(pivots_[r])) f += sys_.rows[r];
        return f;
    }

    /// Whether `form` is constant on the subspace, and which constant.
    Implied implied_value(const AffineForm& form) const {
        AffineForm res = reduce(form);
        if (!res.is_constant()) return Implied::Free;
        return res.constant ? Implied::One : Implied::Zero;
    }

    /// Particular point plus kernel basis: the map c -> particular + sum c_i b_i
    /// is a bijection from F2^dim onto the subspace.
    Parameterization parameterization() const {
        Parameterization p;
        p.particular = BitVec(n());
        for (std::size_t r = 0; r < sys_.rows.size(); ++r)
            p.particular.set(pivots_[r], sys_.rows[r].constant);
        std::vector<bool> is_pivot(n(), false);
        for (auto c : pivots_) is_pivot[c] = true;
        for (std::size_t col = 0; col < n(); ++col) {
            if (is_pivot[col]) continue;
            BitVec b(n());
            b.set(col, true);
            for (std::size_t r = 0; r < sys_.rows.size(); ++r)
                if (sys_.rows[r].coeffs.get(col)) b.set(pivots_[r], true);
            p.basis.push_back(std::move(b));
        }
        return p;
    }

    std::optional<AffineSubspace> intersect(const std::vector<AffineForm>& extra) const {
        LinearSystem sys = sys_;
        for (const auto& f : extra) sys.add_row(f);
        return from_system(sys);
    }

    friend bool operator==(const AffineSubspace& a, const AffineSubspace& b) {
        return a.sys_ == b.sys_;  // RREF is canonical
    }

private:
    AffineSubspace() = default;

    LinearSystem sys_;
    std::vector<std::size_t> pivots_;
};

/// Rewrites a form on ambient coordinates as a form on the kernel
/// coefficients of `p`: substitutes x = particular + sum c_i basis_i.
inline AffineForm restrict_to_kernel(const AffineForm& f, const AffineSubspace::Parameterization& p) {
    AffineForm out(p.basis.size(), f.eval(p.particular));
    for (std::size_t i = 0; i < p.basis.size(); ++i)
        if (f.coeffs.dot(p.basis[i])) out.coeffs.set(i, true);
    return out;
}

inline BitVec point_from_coeffs(const AffineSubspace::Parameterization& p, const BitVec& c) {
    if (c.size() != p.basis.size()) throw std::invalid_argument("point_from_coeffs: arity mismatch");
    BitVec x = p.particular;
    for (std::size_t i = 0; i < p.basis.size(); ++i)
        if (c.get(i)) x ^= p.basis[i];
    return x;
}

/// Drops `row` from the system after eliminating variable `var` (which must
/// have a nonzero coefficient in that row) from every other row. Each
/// solution of the result extends to exactly one solution of the input by
/// choosing `var` to satisfy the dropped row.
inline LinearSystem eliminate_variable(const LinearSystem& sys, std::size_t var, std::size_t row) {
    if (row >= sys.rows.size() || var >= sys.n || !sys.rows[row].coeffs.get(var))
        throw std::invalid_argument("eliminate_variable: row has no coefficient on var");
    LinearSystem out(sys.n);
    for (std::size_t r = 0; r < sys.rows.size(); ++r) {
        if (r == row) continue;
        AffineForm f = sys.rows[r];
        if (f.coeffs.get(var)) f += sys.rows[row];
        out.add_row(std::move(f));
    }
    return out;
}

inline constexpr unsigned kDefaultEnumCap = 30;

/// Visits every point of the subspace exactly once (Gray-code order over the
/// kernel coefficients; deterministic). The visitor may return false to stop.
template <class Visit>
void for_each_point(const AffineSubspace& space, Visit&& visit, unsigned cap = kDefaultEnumCap) {
    if (space.dim() > cap || space.dim() >= 64)
        throw std::length_error("for_each_point: dimension exceeds enumeration cap");
    auto p = space.parameterization();
    BitVec x = p.particular;
    if (!visit(static_cast<const BitVec&>(x))) return;
    const std::uint64_t total = std::uint64_t{1} << space.dim();
    for (std::uint64_t i = 1; i < total; ++i) {
        x ^= p.basis[static_cast<std::size_t>(std::countr_zero(i))];
        if (!visit(static_cast<const BitVec&>(x))) return;
    }
}

inline std::vector<BitVec> enumerate_points(const AffineSubspace& space, unsigned cap = kDefaultEnumCap) {
    std::vector<BitVec> pts;
    pts.reserve(std::size_t{1} << std::min<std::size_t>(space.dim(), 20));
    for_each_point(
        space,
        [&](const BitVec& x) {
            pts.push_back(x);
            return true;
        },
        cap);
    return pts;
}

} // namespace subsat
