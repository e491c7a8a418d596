#include "igsim/inferkit/report.hpp"

#include <cstdio>
#include <sstream>

namespace igsim::inferkit {

nlohmann::json coef_table_json(const std::vector<CoefRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"Predictor", r.term}, {"beta", r.beta}, {"SE", r.se}, {"p", r.p}, {"p_fmt", format_p(r.p)}});
    return arr;
}

std::string coef_table_csv(const std::vector<CoefRow>& rows) {
    std::ostringstream os;
    os.precision(10);
    os << "Predictor,beta,SE,p\n";
    for (const auto& r : rows) os << '"' << r.term << "\"," << r.beta << ',' << r.se << ',' << r.p << '\n';
    return os.str();
}

std::string format_p(double p) {
    if (p < 0.001) return "<.001";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", p);
    std::string s(buf);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
}

}  // namespace igsim::inferkit
