#include "adaptisent/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adaptisent/config_io.hpp"

namespace adaptisent {

std::string checkpoint_to_string(const Checkpoint& ckpt) {
    std::ostringstream out;
    out << kCheckpointVersion << "\n";
    out << "[config]\n";
    out << run_config_to_string(ckpt.config);
    out << "[tensors]\n";
    char buf[40];
    for (const auto& [name, tensor] : ckpt.params.groups()) {
        out << name << ' ' << tensor->rows() << ' ' << tensor->cols() << "\n";
        for (std::size_t r = 0; r < tensor->rows(); ++r) {
            for (std::size_t c = 0; c < tensor->cols(); ++c) {
                // hexfloat round-trips exactly
                std::snprintf(buf, sizeof buf, "%a", (*tensor)(r, c));
                out << (c ? " " : "") << buf;
            }
            out << "\n";
        }
    }
    return out.str();
}

Checkpoint checkpoint_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCheckpointVersion)
        throw IoError("checkpoint: bad or missing version line (expected " +
                      std::string(kCheckpointVersion) + ")");
    if (!std::getline(in, line) || line != "[config]")
        throw IoError("checkpoint: missing [config] section");

    std::ostringstream config_text;
    while (std::getline(in, line)) {
        if (line == "[tensors]") break;
        config_text << line << "\n";
    }
    if (line != "[tensors]") throw IoError("checkpoint: missing [tensors] section");

    Checkpoint ckpt;
    ckpt.config = parse_run_config(config_text.str());
    ckpt.config.validate();

    auto groups = ckpt.params.groups();
    std::size_t next = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream header(line);
        std::string name;
        std::size_t rows = 0, cols = 0;
        if (!(header >> name >> rows >> cols))
            throw IoError("checkpoint: malformed tensor header: " + line);
        if (next >= groups.size() || groups[next].first != name)
            throw IoError("checkpoint: unexpected tensor " + name);
        Tensor t(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!std::getline(in, line)) throw IoError("checkpoint: truncated tensor " + name);
            const char* p = line.c_str();
            char* endp = nullptr;
            for (std::size_t c = 0; c < cols; ++c) {
                const double v = std::strtod(p, &endp);
                if (endp == p) throw IoError("checkpoint: bad value in tensor " + name);
                t(r, c) = v;
                p = endp;
            }
        }
        require_finite(t, ("checkpoint tensor " + name).c_str());
        *groups[next].second = std::move(t);
        ++next;
    }
    if (next != groups.size())
        throw IoError("checkpoint: expected " + std::to_string(groups.size()) + " tensors, found " +
                      std::to_string(next));
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out << checkpoint_to_string(ckpt);
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_string(buf.str());
}

} // namespace adaptisent
