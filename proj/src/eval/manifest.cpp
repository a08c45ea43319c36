#include "ponzilens/error.hpp"
#include "ponzilens/eval.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

namespace ponzilens {

std::string_view to_string(Label label)
{
    return label == Label::Ponzi ? "ponzi" : "non_ponzi";
}

std::optional<Label> parse_label(std::string_view text)
{
    std::string t(text);
    for (char& c : t)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "ponzi" || t == "1" || t == "true")
        return Label::Ponzi;
    if (t == "non_ponzi" || t == "non-ponzi" || t == "nonponzi" || t == "0" || t == "false")
        return Label::NonPonzi;
    return std::nullopt;
}

const ManifestEntry* DatasetManifest::find(std::string_view id) const
{
    for (const auto& e : entries)
        if (e.id == id)
            return &e;
    return nullptr;
}

void DatasetManifest::validate() const
{
    std::set<std::string> ids;
    for (const auto& e : entries) {
        if (e.id.empty())
            throw Error(ErrorCode::InvalidArgument, "manifest '" + name + "' has an entry without id");
        if (!ids.insert(e.id).second)
            throw Error(ErrorCode::InvalidArgument, "manifest '" + name + "' repeats id '" + e.id + "'");
    }
}

namespace {

std::string resolve(const std::string& path_or_address, const std::filesystem::path& base_dir)
{
    if (base_dir.empty() || is_valid_address(path_or_address))
        return path_or_address;
    std::filesystem::path p(path_or_address);
    return p.is_absolute() ? path_or_address : (base_dir / p).lexically_normal().string();
}

ManifestEntry make_entry(std::string id, std::string path, std::string_view label, std::size_t line,
                         const std::filesystem::path& base_dir)
{
    auto parsed = parse_label(label);
    if (!parsed)
        throw Error(ErrorCode::InvalidArgument, "manifest line " + std::to_string(line) + ": unknown label '" + std::string(label) + "'");
    return {std::move(id), resolve(path, base_dir), *parsed};
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text, std::string name, const std::filesystem::path& base_dir)
{
    DatasetManifest m;
    m.name = std::move(name);
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        if (line[0] == '{') {
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw Error(ErrorCode::JsonError, "manifest line " + std::to_string(line_no) + " is not valid JSON");
            std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>()
                                : j.contains("label") && j["label"].is_boolean() ? (j["label"].get<bool>() ? "ponzi" : "non_ponzi")
                                : j.contains("label") && j["label"].is_number() ? std::to_string(j["label"].get<int>())
                                                                                 : std::string{};
            std::string path = j.value("path_or_address", j.value("path", j.value("address", "")));
            m.entries.push_back(make_entry(j.value("id", ""), path, label, line_no, base_dir));
            first = false;
            continue;
        }
        boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
        std::vector<std::string> fields;
        for (auto f : tok) {
            boost::algorithm::trim(f);
            fields.push_back(std::move(f));
        }
        if (first && !fields.empty() && fields[0] == "id") {
            first = false;
            continue;
        }
        first = false;
        if (fields.size() != 3)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": expected id,path_or_address,label");
        m.entries.push_back(make_entry(fields[0], fields[1], fields[2], line_no, base_dir));
    }
    m.validate();
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.stem().string(), path.parent_path());
}

}  // namespace ponzilens
