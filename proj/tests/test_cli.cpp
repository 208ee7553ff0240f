#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string output;
};

fs::path tmp_root() {
    const char* env = std::getenv("IPS_TEST_TMP");
    fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "ips_cli_test";
    fs::create_directories(p);
    return p;
}

CliRun ips(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(IPS_CLI_PATH) + " " + args + " 2>&1";
    CliRun r{0, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, "popen failed"};
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

std::string scenario(const std::string& name) { return std::string(IPS_SCENARIO_DIR) + "/" + name; }

std::string annulus_toml(const std::string& bc, double k) {
    char kbuf[64];
    std::snprintf(kbuf, sizeof kbuf, "%.17g", k);
    return std::string("k = ") + kbuf + "\n[domain]\nkind = \"circle\"\nparams = [1.0]\n"
           "[[obstacles]]\nkind = \"circle\"\nparams = [0.5]\nbc = \"" + bc + "\"\n[validation]\nmin_gap = 0.3\n";
}

}  // namespace

TEST(Cli, SynthesizeIsDeterministic) {
    const fs::path a = tmp_root() / "syn_a", b = tmp_root() / "syn_b";
    const CliRun r1 = ips("synthesize --scenario " + scenario("s1_annulus.toml") + " --out " + a.string());
    ASSERT_EQ(r1.code, 0) << r1.output;
    const CliRun r2 = ips("synthesize --scenario " + scenario("s1_annulus.toml") + " --out " + b.string());
    ASSERT_EQ(r2.code, 0) << r2.output;
    for (const char* f : {"dnmap_D.json", "dnmap_0.json", "fingerprint.txt"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    // Rerun into the same directory.
    const std::string before = slurp(a / "dnmap_D.json");
    ASSERT_EQ(ips("synthesize --scenario " + scenario("s1_annulus.toml") + " --out " + a.string()).code, 0);
    EXPECT_EQ(slurp(a / "dnmap_D.json"), before);
}

TEST(Cli, InvalidScenarioExitCode) {
    const fs::path p = tmp_root() / "bad.toml";
    spit(p,
         "[domain]\nkind = \"circle\"\nparams = [1.0]\n"
         "[[obstacles]]\nkind = \"circle\"\ncenter = [-0.2, 0.0]\nparams = [0.3]\nbc = \"dirichlet\"\n"
         "[[obstacles]]\nkind = \"circle\"\ncenter = [0.2, 0.0]\nparams = [0.3]\nbc = \"neumann\"\n");
    const CliRun r = ips("synthesize --scenario " + p.string() + " --out " + (tmp_root() / "bad").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("obstacles 0 and 1"), std::string::npos) << r.output;

    const fs::path typo = tmp_root() / "typo.toml";
    spit(typo, "wavenumber = 1.0\n");
    EXPECT_EQ(ips("verify --scenario " + typo.string()).code, 2);
    EXPECT_EQ(ips("verify --scenario /nonexistent.toml").code, 2);
    EXPECT_EQ(ips("frobnicate").code, 2);
}

TEST(Cli, VerifyAnnulusAndCorruptedDn) {
    const fs::path d = tmp_root() / "verify_s1";
    ASSERT_EQ(ips("synthesize --scenario " + scenario("s1_annulus.toml") + " --out " + d.string()).code, 0);
    const CliRun ok = ips("verify --scenario " + scenario("s1_annulus.toml") + " --out " + d.string());
    EXPECT_EQ(ok.code, 0) << ok.output;
    EXPECT_TRUE(fs::exists(d / "report.json"));
    EXPECT_TRUE(fs::exists(d / "summary.txt"));
    const std::string report = slurp(d / "report.json");
    for (const char* id : {"thm1.1-neumann", "thm1.2-dirichlet", "cor3.1-n", "dn-symmetry", "outer-decomp",
                           "inner-decomp", "twisted-symmetry", "smallness"})
        EXPECT_NE(report.find(id), std::string::npos) << id;

    // Report is reproducible (timing lives in its own file).
    ASSERT_EQ(ips("verify --scenario " + scenario("s1_annulus.toml") + " --out " + d.string()).code, 0);
    EXPECT_EQ(slurp(d / "report.json"), report);

    // Scale one mode of the obstacle DN map by 1e-3.
    std::string dn = slurp(d / "dnmap_D.json");
    const auto rows = dn.find("\"matrix\"");
    ASSERT_NE(rows, std::string::npos);
    const auto row1 = dn.find('[', dn.find(']', dn.find('[', dn.find('[', rows) + 1)) + 1);
    const auto start = dn.find(',', row1) + 1;
    const auto end = dn.find_first_of(",]", start);
    const double v = std::stod(dn.substr(start, end - start));
    char buf[64];
    std::snprintf(buf, sizeof buf, " %.17g", v * 1.001);
    dn.replace(start, end - start, buf);
    spit(d / "dnmap_D.json", dn);
    const CliRun bad = ips("verify --scenario " + scenario("s1_annulus.toml") + " --out " + d.string());
    EXPECT_EQ(bad.code, 1) << bad.output;
    EXPECT_NE(bad.output.find("inner-decomp"), std::string::npos) << bad.output;
}

TEST(Cli, OracleTables) {
    const CliRun d = ips("oracle --scenario " + scenario("s1_annulus.toml"));
    ASSERT_EQ(d.code, 0) << d.output;
    std::istringstream in(d.output);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        int mode;
        double oD, aD, eD;
        if (std::sscanf(line.c_str(), "%d %lf %lf %lf", &mode, &oD, &aD, &eD) == 4 && mode == 0) {
            EXPECT_NEAR(oD, 1.4426950, 1e-7);
            EXPECT_LT(eD, 1e-7);
            found = true;
        }
    }
    EXPECT_TRUE(found) << d.output;

    const fs::path n = tmp_root() / "neumann.toml";
    spit(n, annulus_toml("neumann", 0.0));
    const CliRun r = ips("oracle --scenario " + n.string());
    ASSERT_EQ(r.code, 0) << r.output;
    std::istringstream in2(r.output);
    found = false;
    while (std::getline(in2, line)) {
        int mode;
        double oD, aD;
        if (std::sscanf(line.c_str(), "%d %lf %lf", &mode, &oD, &aD) == 3 && mode == 0) {
            EXPECT_EQ(oD, 0.0);
            EXPECT_LT(std::abs(aD), 1e-8);
            found = true;
        }
    }
    EXPECT_TRUE(found) << r.output;
}

TEST(Cli, OracleResonanceAndUnsupported) {
    // First Dirichlet eigenvalue of the annulus on mode 0, located with the std Bessel functions.
    auto den = [](double k) {
        return std::cyl_bessel_j(0.0, k) * std::cyl_neumann(0.0, 0.5 * k) - std::cyl_neumann(0.0, k) * std::cyl_bessel_j(0.0, 0.5 * k);
    };
    double lo = 5.5, hi = 6.8;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (den(mid) * den(lo) > 0 ? lo : hi) = mid;
    }
    const fs::path p = tmp_root() / "resonant.toml";
    spit(p, annulus_toml("dirichlet", lo));
    const CliRun r = ips("oracle --scenario " + p.string());
    EXPECT_EQ(r.code, 3) << r.output;
    EXPECT_NE(r.output.find("resonance at mode 0"), std::string::npos) << r.output;

    const CliRun u = ips("oracle --scenario " + scenario("s2_two_obstacles.toml"));
    EXPECT_EQ(u.code, 2) << u.output;
}

TEST(Cli, ProbeEmptyObstacleAllBackground) {
    const fs::path p = tmp_root() / "empty.toml";
    spit(p, "[domain]\nkind = \"circle\"\nparams = [1.0]\n[validation]\nmin_gap = 0.3\n");
    const fs::path d = tmp_root() / "empty_out";
    fs::remove_all(d);
    EXPECT_NE(ips("probe --scenario " + p.string() + " --out " + d.string()).code, 0);  // no DN data yet
    ASSERT_EQ(ips("synthesize --scenario " + p.string() + " --out " + d.string()).code, 0);
    const CliRun r = ips("probe --scenario " + p.string() + " --out " + d.string() + " --grid 6,6");
    ASSERT_EQ(r.code, 0) << r.output;
    std::istringstream in(slurp(d / "indicator_field.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,value,converged,label,needle_entry_angle");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find(",background,"), std::string::npos) << line;
    }
    EXPECT_GT(rows, 10);
}

TEST(Cli, ProbeParallelEqualsSerialAndScores) {
    const fs::path d = tmp_root() / "probe_s2";
    ASSERT_EQ(ips("synthesize --scenario " + scenario("s2_two_obstacles.toml") + " --out " + d.string()).code, 0);
    const CliRun a = ips("probe --scenario " + scenario("s2_two_obstacles.toml") + " --out " + d.string() +
                      " --grid 8,8 --threads 1 --score");
    ASSERT_EQ(a.code, 0) << a.output;
    const std::string serial = slurp(d / "indicator_field.csv"), report = slurp(d / "report.json");
    EXPECT_NE(report.find("\"precision\""), std::string::npos);
    EXPECT_NE(report.find("\"recall\""), std::string::npos);
    const CliRun b = ips("probe --scenario " + scenario("s2_two_obstacles.toml") + " --out " + d.string() + " --grid 8,8 --score",
                      "IPS_THREADS=3");
    ASSERT_EQ(b.code, 0) << b.output;
    EXPECT_EQ(slurp(d / "indicator_field.csv"), serial);
    EXPECT_EQ(slurp(d / "report.json"), report);
}

TEST(Cli, PrintConfigShowsDefaults) {
    const CliRun r = ips("verify --scenario " + scenario("s1_annulus.toml") + " --print-config --threads 4 --orders 5,10");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("threads = 4"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("orders = [5, 10]"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("outer_nodes"), std::string::npos);
    EXPECT_EQ(ips("probe --scenario " + scenario("s1_annulus.toml") + " --grid 3").code, 2);
    EXPECT_EQ(ips("probe --scenario " + scenario("s1_annulus.toml") + " --needle-strategy zigzag").code, 2);
}
