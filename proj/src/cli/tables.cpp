#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "dermabcd/cli.hpp"

namespace dermabcd::cli {

namespace fs = std::filesystem;

std::optional<int> parse_label(const std::string& text) {
    std::string t;
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (t == "malignant" || t == "1") {
        return 1;
    }
    if (t == "benign" || t == "0") {
        return 0;
    }
    return std::nullopt;
}

std::string label_name(int label) { return label == 1 ? "malignant" : "benign"; }

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
    std::istringstream in(read_text(path));
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(t.header.size()) + " columns");
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) {
        throw std::runtime_error(path.string() + ": empty CSV");
    }
    return t;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out.push_back(',');
            }
            out += cells[i];
        }
        out.push_back('\n');
    };
    line(table.header);
    for (const auto& r : table.rows) {
        line(r);
    }
    return out;
}

std::vector<std::string> feature_csv_header(bool with_mm) {
    std::vector<std::string> h{"id"};
    for (const char* name : FeatureVector::column_names()) {
        h.emplace_back(name);
    }
    if (with_mm) {
        h.emplace_back("diam_mm");
    }
    h.emplace_back("label");
    return h;
}

CsvTable features_table(std::vector<FeatureRow> rows, bool with_mm) {
    std::sort(rows.begin(), rows.end(), [](const FeatureRow& a, const FeatureRow& b) { return a.id < b.id; });
    CsvTable t;
    t.header = feature_csv_header(with_mm);
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.id};
        for (double v : r.features.values()) {
            cells.push_back(format_number(v));
        }
        if (with_mm) {
            cells.push_back(r.features.diameter_mm ? format_number(*r.features.diameter_mm) : std::string());
        }
        cells.push_back(r.label ? label_name(*r.label) : std::string());
        t.rows.push_back(std::move(cells));
    }
    return t;
}

LabeledFeatures records_from_table(const CsvTable& table) {
    const int id_col = table.column("id");
    const int label_col = table.column("label");
    if (id_col < 0 || label_col < 0) {
        throw std::runtime_error("features CSV needs 'id' and 'label' columns");
    }
    std::vector<int> cols;
    for (const char* name : FeatureVector::column_names()) {
        const int c = table.column(name);
        if (c < 0) {
            throw std::runtime_error(std::string("features CSV is missing column '") + name + "'");
        }
        cols.push_back(c);
    }
    LabeledFeatures out;
    for (const auto& row : table.rows) {
        const auto& id = row[static_cast<std::size_t>(id_col)];
        const auto label = parse_label(row[static_cast<std::size_t>(label_col)]);
        if (!label) {
            out.unlabeled_ids.push_back(id);
            continue;
        }
        Record r;
        r.id = id;
        r.label = *label;
        for (int c : cols) {
            try {
                r.features.push_back(std::stod(row[static_cast<std::size_t>(c)]));
            } catch (const std::exception&) {
                throw std::runtime_error("features CSV: non-numeric value in row '" + id + "'");
            }
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

IngestResult ingest(const fs::path& dir, const std::optional<fs::path>& labels) {
    if (!fs::is_directory(dir)) {
        throw ConfigError("input directory " + dir.string() + " does not exist");
    }
    IngestResult res;
    std::map<std::string, fs::path> images;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        std::string ext = p.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext != ".png") {
            continue;
        }
        const std::string id = p.stem().string();
        if (id.find(',') != std::string::npos) {
            res.errors.emplace_back(p.filename().string(), "id contains a comma");
            continue;
        }
        if (!images.emplace(id, p).second) {
            res.errors.emplace_back(p.filename().string(), "duplicate id '" + id + "'");
        }
    }

    std::map<std::string, int> label_of;
    if (labels) {
        CsvTable t;
        try {
            t = read_csv(*labels);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("labels: ") + e.what());
        }
        const int id_col = t.column("id");
        const int label_col = t.column("label");
        if (id_col < 0 || label_col < 0) {
            throw ConfigError("labels CSV needs 'id' and 'label' columns");
        }
        for (const auto& row : t.rows) {
            const auto& id = row[static_cast<std::size_t>(id_col)];
            const auto label = parse_label(row[static_cast<std::size_t>(label_col)]);
            if (!label) {
                res.warnings.push_back("label row '" + id + "' has unknown label '" +
                                       row[static_cast<std::size_t>(label_col)] + "'; skipped");
                continue;
            }
            if (!images.count(id)) {
                res.warnings.push_back("label row '" + id + "' has no image; skipped");
                continue;
            }
            if (!label_of.emplace(id, *label).second) {
                res.warnings.push_back("label row '" + id + "' is a duplicate; first one kept");
            }
        }
    }

    for (const auto& [id, path] : images) {
        IngestItem item{id, path, std::nullopt};
        const auto it = label_of.find(id);
        if (it != label_of.end()) {
            item.label = it->second;
            ++res.labeled;
        } else {
            ++res.unlabeled;
        }
        res.items.push_back(std::move(item));
    }
    return res;
}

}  // namespace dermabcd::cli
