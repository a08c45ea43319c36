#include "ponzilens/detect.hpp"
#include "ponzilens/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef PONZILENS_TEMPLATE_DIR
#define PONZILENS_TEMPLATE_DIR "templates"
#endif

namespace ponzilens {

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::Full: return "full";
    case Mode::NoTaint: return "no_taint";
    case Mode::Raw: return "raw";
    }
    return "unknown";
}

std::string_view to_string(Stage stage)
{
    return stage == Stage::Analysis ? "analysis" : "detection";
}

std::optional<Mode> parse_mode(std::string_view text)
{
    if (text == "full")
        return Mode::Full;
    if (text == "no-taint" || text == "no_taint")
        return Mode::NoTaint;
    if (text == "raw")
        return Mode::Raw;
    return std::nullopt;
}

namespace {

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read template file " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start])))
        ++start;
    return s.substr(start);
}

bool is_blank(std::string_view s)
{
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            return false;
    return true;
}

PromptBundle finish(Stage stage, std::string rendered, PromptParts parts, const TemplateSet& t)
{
    PromptBundle p;
    p.stage = stage;
    p.rendered = std::move(rendered);
    p.parts = std::move(parts);
    p.token_estimate = estimate_tokens(p.rendered);
    p.template_version = t.version;
    return p;
}

}  // namespace

TemplateSet TemplateSet::load(const std::filesystem::path& dir)
{
    TemplateSet t;
    t.version = trim(read_file(dir / "VERSION"));
    t.analysis = read_file(dir / "analysis.tmpl");
    t.detection = read_file(dir / "detection.tmpl");
    t.ponzi_definition = trim(read_file(dir / "ponzi_definition.txt"));
    return t;
}

std::filesystem::path TemplateSet::default_dir()
{
    if (const char* env = std::getenv("PONZILENS_TEMPLATE_DIR"); env != nullptr && *env != '\0')
        return env;
    return PONZILENS_TEMPLATE_DIR;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars)
{
    auto bound = [&](const std::string& name) {
        auto it = vars.find(name);
        return it != vars.end() && !it->second.empty();
    };

    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        std::size_t open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw Error(ErrorCode::InvalidArgument, "unterminated template tag");
        std::string tag(tmpl.substr(open + 2, close - open - 2));
        i = close + 2;

        if (!tag.empty() && tag[0] == '#') {
            std::string name = tag.substr(1);
            std::string end_tag = "{{/" + name + "}}";
            std::size_t end = tmpl.find(end_tag, i);
            if (end == std::string_view::npos)
                throw Error(ErrorCode::InvalidArgument, "section '" + name + "' is not closed");
            std::size_t body_start = i < tmpl.size() && tmpl[i] == '\n' ? i + 1 : i;
            std::string_view body = tmpl.substr(body_start, end - body_start);
            i = end + end_tag.size();
            if (i < tmpl.size() && tmpl[i] == '\n')
                ++i;
            if (bound(name))
                out += render_template(body, vars);
            continue;
        }
        auto it = vars.find(tag);
        if (it != vars.end())
            out += it->second;
    }
    return out;
}

std::size_t estimate_tokens(std::string_view text)
{
    return (text.size() + 3) / 4;
}

PromptBundle build_analysis_prompt(const SliceBundle& bundle, const DotDocument* dot, Mode mode,
                                   const TemplateSet& templates, std::string_view raw_source)
{
    PromptParts parts;
    if (mode == Mode::Raw) {
        if (is_blank(raw_source))
            throw Error(ErrorCode::EmptyInput, "no source code to analyse");
        parts.code = std::string(raw_source);
    } else {
        if (is_blank(bundle.combined_text))
            throw Error(ErrorCode::EmptyInput, "no function interacts with tainted data; nothing to analyse");
        parts.code = bundle.header.empty() ? bundle.combined_text : bundle.header + "\n" + bundle.combined_text;
        if (mode == Mode::Full) {
            if (dot == nullptr)
                throw Error(ErrorCode::InvalidArgument, "full mode needs a taint graph");
            parts.dot = dot->text;
        }
    }
    std::map<std::string, std::string> vars = {{"code", *parts.code}};
    if (parts.dot)
        vars["graph"] = *parts.dot;
    std::string rendered = render_template(templates.analysis, vars);
    return finish(Stage::Analysis, std::move(rendered), std::move(parts), templates);
}

PromptBundle build_detection_prompt(std::string_view analysis, std::string_view ponzi_definition,
                                    const TemplateSet& templates)
{
    if (is_blank(analysis))
        throw Error(ErrorCode::EmptyInput, "analysis text is empty");
    if (is_blank(ponzi_definition))
        throw Error(ErrorCode::EmptyInput, "Ponzi definition is empty");
    PromptParts parts;
    parts.prior_analysis = std::string(analysis);
    parts.ponzi_definition = std::string(ponzi_definition);
    std::string rendered = render_template(templates.detection,
                                           {{"analysis", *parts.prior_analysis}, {"definition", *parts.ponzi_definition}});
    return finish(Stage::Detection, std::move(rendered), std::move(parts), templates);
}

}  // namespace ponzilens
