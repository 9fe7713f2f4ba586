#include "plab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plab {

namespace {

// Section tags
enum : std::uint32_t {
    kTagConfig = 0x43464754,  // "CFGT"
    kTagState = 0x53544154,   // "STAT"
    kTagParams = 0x50415241,  // "PARA"
    kTagProx = 0x50524F58,    // "PROX"
    kTagAdam = 0x4144414D,    // "ADAM"
    kTagVenv = 0x56454E56,    // "VENV"
    kTagRng = 0x524E4753,     // "RNGS"
    kTagBuffer = 0x42554646,  // "BUFF"
    kTagMetrics = 0x4D455452, // "METR"
};

struct Writer {
    std::string buf;
    void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i64(std::int64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void vec(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * 8);
    }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    void rng(const RngStream& r) {
        u64(r.key);
        u64(r.counter);
    }
};

struct Reader {
    const char* p;
    const char* end;
    void raw(void* out, std::size_t n) {
        if (static_cast<std::size_t>(end - p) < n)
            throw std::runtime_error("checkpoint: truncated section");
        std::memcpy(out, p, n);
        p += n;
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    std::int64_t i64() { std::int64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::int32_t i32() { std::int32_t v; raw(&v, 4); return v; }
    std::vector<double> vec() {
        std::uint64_t n = u64();
        std::vector<double> v(n);
        raw(v.data(), n * 8);
        return v;
    }
    std::string str() {
        std::uint64_t n = u64();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    RngStream rng() {
        RngStream r;
        r.key = u64();
        r.counter = u64();
        return r;
    }
};

void write_venv(Writer& w, const VecEnv& env) {
    w.i32(env.kind == EnvKind::pointnav ? 0 : 1);
    w.i32(env.n_slots);
    w.i32(env.episode_cap);
    w.i32(env.chain.n_states);
    w.i32(env.chain.episode_cap);
    w.f64(env.chain.slip_prob);
    for (int i = 0; i < env.n_slots; ++i) {
        if (env.kind == EnvKind::pointnav) {
            const PointNavParams& p = env.pn_params[i];
            w.f64(p.goal[0]); w.f64(p.goal[1]);
            w.f64(p.force_gain); w.f64(p.friction); w.f64(p.success_radius);
            w.i32(p.episode_cap); w.u64(p.level_seed);
            const PointNavState& s = env.pn_state[i];
            w.f64(s.pos[0]); w.f64(s.pos[1]); w.f64(s.vel[0]); w.f64(s.vel[1]);
            w.i32(s.steps);
        } else {
            w.i32(env.ch_state[i].state);
            w.i32(env.ch_state[i].steps);
        }
        w.rng(env.slot_rng[i]);
        w.f64(env.ep_return[i]);
        w.i32(env.ep_steps[i]);
    }
    w.u64(env.fixed_levels.size());
    for (std::uint64_t s : env.fixed_levels) w.u64(s);
}

VecEnv read_venv(Reader& r) {
    VecEnv env;
    env.kind = r.i32() == 0 ? EnvKind::pointnav : EnvKind::chain;
    env.n_slots = r.i32();
    env.episode_cap = r.i32();
    env.chain.n_states = r.i32();
    env.chain.episode_cap = r.i32();
    env.chain.slip_prob = r.f64();
    env.slot_rng.resize(env.n_slots);
    env.ep_return.resize(env.n_slots);
    env.ep_steps.resize(env.n_slots);
    if (env.kind == EnvKind::pointnav) {
        env.pn_params.resize(env.n_slots);
        env.pn_state.resize(env.n_slots);
    } else {
        env.ch_state.resize(env.n_slots);
    }
    for (int i = 0; i < env.n_slots; ++i) {
        if (env.kind == EnvKind::pointnav) {
            PointNavParams& p = env.pn_params[i];
            p.goal[0] = r.f64(); p.goal[1] = r.f64();
            p.force_gain = r.f64(); p.friction = r.f64(); p.success_radius = r.f64();
            p.episode_cap = r.i32(); p.level_seed = r.u64();
            PointNavState& s = env.pn_state[i];
            s.pos[0] = r.f64(); s.pos[1] = r.f64(); s.vel[0] = r.f64(); s.vel[1] = r.f64();
            s.steps = r.i32();
        } else {
            env.ch_state[i].state = r.i32();
            env.ch_state[i].steps = r.i32();
        }
        env.slot_rng[i] = r.rng();
        env.ep_return[i] = r.f64();
        env.ep_steps[i] = r.i32();
    }
    std::uint64_t nfix = r.u64();
    env.fixed_levels.resize(nfix);
    for (auto& s : env.fixed_levels) s = r.u64();
    return env;
}

void section(Writer& out, std::uint32_t tag, const std::string& payload) {
    out.u32(tag);
    out.u64(payload.size());
    out.buf += payload;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    Writer out;
    out.raw("PLAB", 4);
    out.u32(kCheckpointVersion);
    out.u64(ck.cfg_hash);

    { Writer w; w.str(ck.config_text); section(out, kTagConfig, w.buf); }
    { Writer w; w.i64(ck.update_index); w.i64(ck.env_steps); section(out, kTagState, w.buf); }
    { Writer w; w.vec(ck.params); section(out, kTagParams, w.buf); }
    { Writer w; w.vec(ck.prox); w.f64(ck.ewma_beta); section(out, kTagProx, w.buf); }
    {
        Writer w;
        w.i64(ck.adam.t);
        w.f64(ck.adam.lr); w.f64(ck.adam.beta1); w.f64(ck.adam.beta2); w.f64(ck.adam.eps);
        w.vec(ck.adam.m); w.vec(ck.adam.v);
        section(out, kTagAdam, w.buf);
    }
    { Writer w; write_venv(w, ck.venv); section(out, kTagVenv, w.buf); }
    {
        Writer w;
        w.u64(ck.policy_rng.size());
        for (const RngStream& s : ck.policy_rng) w.rng(s);
        w.rng(ck.update_rng);
        w.rng(ck.level_rng);
        section(out, kTagRng, w.buf);
    }
    {
        Writer w;
        w.u64(ck.buffer.entries.size());
        for (const LevelEntry& e : ck.buffer.entries) {
            w.u64(e.level_seed);
            w.f64(e.score);
            w.i64(e.scored_at);
        }
        section(out, kTagBuffer, w.buf);
    }
    {
        Writer w;
        w.i64(ck.metrics_rows);
        w.f64(ck.last_mean_return);
        w.f64(ck.last_solve_rate);
        section(out, kTagMetrics, w.buf);
    }

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write checkpoint: " + tmp.string());
        f.write(out.buf.data(), static_cast<std::streamsize>(out.buf.size()));
        f.flush();
        if (!f) throw std::runtime_error("checkpoint write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    std::string buf = ss.str();

    Reader r{buf.data(), buf.data() + buf.size()};
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "PLAB", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    ck.cfg_hash = r.u64();
    while (r.p != r.end) {
        std::uint32_t tag = r.u32();
        std::uint64_t len = r.u64();
        if (static_cast<std::uint64_t>(r.end - r.p) < len)
            throw std::runtime_error("checkpoint: truncated section");
        Reader s{r.p, r.p + len};
        r.p += len;
        switch (tag) {
            case kTagConfig: ck.config_text = s.str(); break;
            case kTagState:
                ck.update_index = s.i64();
                ck.env_steps = s.i64();
                break;
            case kTagParams: ck.params = s.vec(); break;
            case kTagProx:
                ck.prox = s.vec();
                ck.ewma_beta = s.f64();
                break;
            case kTagAdam:
                ck.adam.t = s.i64();
                ck.adam.lr = s.f64(); ck.adam.beta1 = s.f64();
                ck.adam.beta2 = s.f64(); ck.adam.eps = s.f64();
                ck.adam.m = s.vec(); ck.adam.v = s.vec();
                break;
            case kTagVenv: ck.venv = read_venv(s); break;
            case kTagRng: {
                std::uint64_t n = s.u64();
                ck.policy_rng.resize(n);
                for (auto& st : ck.policy_rng) st = s.rng();
                ck.update_rng = s.rng();
                ck.level_rng = s.rng();
                break;
            }
            case kTagBuffer: {
                std::uint64_t n = s.u64();
                ck.buffer.entries.resize(n);
                for (auto& e : ck.buffer.entries) {
                    e.level_seed = s.u64();
                    e.score = s.f64();
                    e.scored_at = s.i64();
                }
                break;
            }
            case kTagMetrics:
                ck.metrics_rows = s.i64();
                ck.last_mean_return = s.f64();
                ck.last_solve_rate = s.f64();
                break;
            default:
                throw std::runtime_error("checkpoint: unknown section tag");
        }
        if (s.p != s.end) throw std::runtime_error("checkpoint: section length mismatch");
    }
    return ck;
}

}  // namespace plab
