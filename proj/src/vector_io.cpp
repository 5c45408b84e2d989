#include "craft/vector_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace craft {

namespace {

constexpr char kDenseMagic[6] = {'C', 'V', 'E', 'C', '1', '\0'};
constexpr char kSparseMagic[6] = {'C', 'S', 'P', 'V', '1', '\0'};

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in, const std::string& path, const char* field) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error(path + ": truncated header (" + field + ")");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

template <typename T>
void read_array(std::istream& in, const std::string& path, T* dst, std::uint64_t n,
                const char* what) {
    if (!in.read(reinterpret_cast<char*>(dst), std::streamsize(n * sizeof(T))))
        throw std::runtime_error(path + ": truncated " + what + " payload");
}

void check_finite(const VectorSet& vs, const std::string& path) {
    if (vs.is_dense()) {
        for (std::uint64_t i = 0; i < vs.dense.size(); ++i)
            if (!std::isfinite(vs.dense[i]))
                throw std::runtime_error(path + ": non-finite value at row " +
                                         std::to_string(i / vs.dim));
    } else {
        for (std::uint64_t r = 0; r < vs.count; ++r)
            for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
                if (!std::isfinite(vs.vals[p]))
                    throw std::runtime_error(path + ": non-finite value at row " +
                                             std::to_string(r));
    }
}

VectorSet load_dense_text(std::istream& in, const std::string& path) {
    std::uint64_t count = 0, dim = 0;
    std::string magic;
    if (!(in >> magic >> count >> dim) || magic != "CVECT")
        throw std::runtime_error(path + ": malformed text vector header");
    VectorSet vs;
    vs.count = count;
    vs.dim = dim;
    vs.dense.resize(count * dim);
    for (std::uint64_t i = 0; i < count * dim; ++i) {
        if (!(in >> vs.dense[i]))
            throw std::runtime_error(path + ": truncated text payload at row " +
                                     std::to_string(i / (dim ? dim : 1)));
    }
    check_finite(vs, path);
    return vs;
}

}  // namespace

void save_vectors(const VectorSet& vs, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vector file: " + path);
    if (vs.is_dense()) {
        out.write(kDenseMagic, 6);
        write_u64(out, vs.count);
        write_u64(out, vs.dim);
        out.write(reinterpret_cast<const char*>(vs.dense.data()),
                  std::streamsize(vs.dense.size() * sizeof(float)));
    } else {
        out.write(kSparseMagic, 6);
        write_u64(out, vs.count);
        write_u64(out, vs.dim);
        write_u64(out, vs.vals.size());
        out.write(reinterpret_cast<const char*>(vs.indptr.data()),
                  std::streamsize(vs.indptr.size() * sizeof(std::uint64_t)));
        out.write(reinterpret_cast<const char*>(vs.cols.data()),
                  std::streamsize(vs.cols.size() * sizeof(std::uint32_t)));
        out.write(reinterpret_cast<const char*>(vs.vals.data()),
                  std::streamsize(vs.vals.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

VectorSet load_vectors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);

    char magic[6] = {};
    if (!in.read(magic, 6)) throw std::runtime_error(path + ": file too short for magic");

    if (!std::memcmp(magic, kDenseMagic, 6)) {
        VectorSet vs;
        vs.count = read_u64(in, path, "count");
        vs.dim = read_u64(in, path, "dim");
        vs.dense.resize(vs.count * vs.dim);
        read_array(in, path, vs.dense.data(), vs.count * vs.dim, "f32");
        char extra;
        if (in.read(&extra, 1))
            throw std::runtime_error(path + ": payload longer than count*dim");
        check_finite(vs, path);
        return vs;
    }
    if (!std::memcmp(magic, kSparseMagic, 6)) {
        VectorSet vs;
        vs.storage = VectorSet::Storage::sparse;
        vs.count = read_u64(in, path, "count");
        vs.dim = read_u64(in, path, "dim");
        const std::uint64_t nnz = read_u64(in, path, "nnz");
        vs.indptr.resize(vs.count + 1);
        vs.cols.resize(nnz);
        vs.vals.resize(nnz);
        read_array(in, path, vs.indptr.data(), vs.count + 1, "indptr");
        read_array(in, path, vs.cols.data(), nnz, "cols");
        read_array(in, path, vs.vals.data(), nnz, "vals");
        check_valid(vs);
        return vs;
    }
    if (!std::memcmp(magic, "CVECT", 5)) {
        in.seekg(0);
        return load_dense_text(in, path);
    }
    throw std::runtime_error(path + ": unrecognized vector file magic");
}

void save_dense_vectors_text(const VectorSet& vs, const std::string& path) {
    if (!vs.is_dense())
        throw std::runtime_error("save_dense_vectors_text: dense vectors required");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vector file: " + path);
    out << "CVECT " << vs.count << " " << vs.dim << "\n";
    out.precision(9);  // float round-trip
    for (std::uint64_t r = 0; r < vs.count; ++r) {
        const float* row = vs.dense_row(r);
        for (std::uint64_t j = 0; j < vs.dim; ++j) {
            if (j) out << ' ';
            out << row[j];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace craft
