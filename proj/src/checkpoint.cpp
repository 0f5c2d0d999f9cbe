#include "groupnav/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace groupnav::net {

namespace {

void write_doubles(std::ostream& out, const double* data, size_t count) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, size_t count, const std::string& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(double))
        throw std::runtime_error("checkpoint: truncated payload in " + path);
}

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
    throw std::runtime_error("checkpoint: " + what + " in " + path);
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const AdamState& adam) {
    const PolicyLayout& layout = policy_layout();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out << "groupnav-checkpoint 1\n";
    out << "adam_step " << adam.t << "\n";
    for (const TensorSpec& t : layout.tensors())
        out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    out << "data\n";
    write_doubles(out, params.data.data(), params.data.size());
    static const std::vector<double> zeros(policy_layout().total(), 0.0);
    const double* m = adam.m.size() == layout.total() ? adam.m.data() : zeros.data();
    const double* v = adam.v.size() == layout.total() ? adam.v.data() : zeros.data();
    write_doubles(out, m, layout.total());
    write_doubles(out, v, layout.total());
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    const PolicyLayout& layout = policy_layout();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "groupnav-checkpoint 1")
        corrupt(path, "unrecognized format line");

    Checkpoint ckpt;
    if (!std::getline(in, line)) corrupt(path, "missing adam_step line");
    {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key >> ckpt.adam.t) || key != "adam_step")
            corrupt(path, "malformed adam_step line");
    }

    size_t index = 0;
    while (std::getline(in, line)) {
        if (line == "data") break;
        std::istringstream ls(line);
        std::string key, name;
        int rows = 0, cols = 0;
        if (!(ls >> key >> name >> rows >> cols) || key != "tensor")
            corrupt(path, "malformed tensor line");
        if (index >= layout.tensors().size()) corrupt(path, "too many tensors");
        const TensorSpec& expect = layout.tensors()[index];
        if (name != expect.name || rows != expect.rows || cols != expect.cols)
            corrupt(path, "tensor " + name + " does not match the expected architecture");
        ++index;
    }
    if (line != "data") corrupt(path, "missing data marker");
    if (index != layout.tensors().size()) corrupt(path, "missing tensors");

    read_doubles(in, ckpt.params.data.data(), layout.total(), path);
    ckpt.adam.m.resize(layout.total());
    ckpt.adam.v.resize(layout.total());
    read_doubles(in, ckpt.adam.m.data(), layout.total(), path);
    read_doubles(in, ckpt.adam.v.data(), layout.total(), path);
    char extra;
    if (in.read(&extra, 1) && in.gcount() == 1) corrupt(path, "trailing bytes");
    return ckpt;
}

}  // namespace groupnav::net
