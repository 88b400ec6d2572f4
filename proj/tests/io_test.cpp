#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tsnzeek/monitor.hpp"
#include "tsnzeek/notice_log.hpp"
#include "tsnzeek/pcap.hpp"
#include "tsnzeek/replay.hpp"

using namespace tsnzeek;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("tsnzeek_io_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

const MacAddress kSrc{0x02, 0, 0, 0, 0, 1};
const MacAddress kDst{0x91, 0xE0, 0xF0, 0, 1, 0};

EtherFrame rtag_frame(std::uint16_t seq, std::size_t data_len = 4) {
  RTagFrame f;
  f.stream_handle = {kDst, 0x0100};
  f.sequence_number = seq;
  f.encapsulated_ethertype = 0x88B5;
  f.data.assign(data_len, 0xAB);
  f.payload_len = static_cast<std::uint32_t>(data_len + 2);
  return encode(f, kSrc);
}

Bytes file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

Notice injected_notice() {
  Notice n;
  n.code = NoticeCode::N6_OutOfOrderFrames;
  n.rule = Rule::A5;
  n.ts = 1700000002.005;
  n.msg = "out of order frame with sequence number 7148, expected 54972";
  n.stream_id = StreamId{kSrc, 0x0100};
  n.evidence = {{"decision", "RogueOutOfRange"}, {"expected", "54972"}, {"observed", "7148"}};
  return n;
}

}  // namespace

// ---- pcap -------------------------------------------------------------------

TEST(Pcap, ThreePacketFile) {
  TempDir dir;
  const auto path = dir.file("three.pcap");
  std::vector<TimestampedFrame> frames = {
      {1.0, rtag_frame(1)}, {1.000001, rtag_frame(2)}, {2.5, rtag_frame(3)}};
  write_pcap(path, frames);
  PcapReader reader(path);
  EXPECT_EQ(reader.link_type(), kLinkTypeEthernet);
  int n = 0;
  while (reader.next()) ++n;
  EXPECT_EQ(n, 3);
  EXPECT_EQ(read_pcap(path), frames);

  // header: magic LE, version 2.4, snaplen 65535, linktype 1
  const Bytes raw = file_bytes(path);
  ASSERT_GE(raw.size(), kPcapFileHeaderLen);
  EXPECT_EQ((Bytes{raw.begin(), raw.begin() + 4}), (Bytes{0xD4, 0xC3, 0xB2, 0xA1}));
  EXPECT_EQ(raw[4], 2);
  EXPECT_EQ(raw[6], 4);
  EXPECT_EQ(raw[20], 1);
}

TEST(Pcap, EmptyFileIsHeaderOnly) {
  TempDir dir;
  const auto path = dir.file("empty.pcap");
  write_pcap(path, std::vector<TimestampedFrame>{});
  EXPECT_EQ(fs::file_size(path), kPcapFileHeaderLen);
  EXPECT_TRUE(read_pcap(path).empty());
}

TEST(Pcap, OutOfOrderRejectedBeforeWriting) {
  TempDir dir;
  const auto path = dir.file("bad.pcap");
  std::vector<TimestampedFrame> frames = {{2.0, rtag_frame(1)}, {1.0, rtag_frame(2)}};
  try {
    write_pcap(path, frames);
    FAIL();
  } catch (const PcapError& e) {
    EXPECT_EQ(e.code(), PcapErrorCode::OutOfOrder);
  }
  EXPECT_FALSE(fs::exists(path));
}

TEST(Pcap, SwappedMagicIsRead) {
  TempDir dir;
  const auto path = dir.file("be.pcap");
  // big-endian header and one 14-byte record
  Bytes raw = {0xA1, 0xB2, 0xC3, 0xD4, 0, 2, 0, 4, 0, 0, 0, 0, 0, 0, 0, 0,
               0, 0, 0xFF, 0xFF, 0, 0, 0, 1,
               0, 0, 0, 10, 0, 0, 0, 5, 0, 0, 0, 14, 0, 0, 0, 14};
  const Bytes eth = to_wire(EtherFrame{kDst, kSrc, 0x0800, {}});
  raw.insert(raw.end(), eth.begin(), eth.end());
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(raw.data()),
                                              static_cast<std::streamsize>(raw.size()));
  const auto frames = read_pcap(path);
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_DOUBLE_EQ(frames[0].ts, 10.000005);
  EXPECT_EQ(frames[0].frame.ethertype, 0x0800);
}

TEST(Pcap, Errors) {
  TempDir dir;
  auto write = [&](const std::string& name, const Bytes& b) {
    const auto p = dir.file(name);
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                             static_cast<std::streamsize>(b.size()));
    return p;
  };
  auto code_of = [](const std::string& p) {
    try {
      (void)read_pcap(p);
    } catch (const PcapError& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error for " << p;
    return PcapErrorCode::IoFailure;
  };
  EXPECT_EQ(code_of(dir.file("missing.pcap")), PcapErrorCode::IoFailure);
  EXPECT_EQ(code_of(write("magic.pcap", Bytes(24, 0))), PcapErrorCode::BadMagic);
  Bytes hdr = {0xD4, 0xC3, 0xB2, 0xA1, 2, 0, 4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xFF, 0xFF, 0, 0, 105, 0, 0, 0};
  EXPECT_EQ(code_of(write("wifi.pcap", hdr)), PcapErrorCode::UnsupportedLinkType);
  hdr[20] = 1;
  Bytes cut = hdr;
  cut.insert(cut.end(), {1, 0, 0, 0, 0, 0, 0, 0, 100, 0, 0, 0, 100, 0, 0, 0, 1, 2, 3});
  EXPECT_EQ(code_of(write("cut.pcap", cut)), PcapErrorCode::TruncatedRecord);
}

// Random frames and timestamps survive a write/read cycle exactly.
TEST(Property, PcapRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::vector<TimestampedFrame> frames;
  std::int64_t us = 1'700'000'000'000'000;
  for (int i = 0; i < 10000; ++i) {
    us += static_cast<std::int64_t>(rng() % 5000);
    EtherFrame f;
    for (auto& b : f.dst_mac) b = static_cast<std::uint8_t>(rng());
    for (auto& b : f.src_mac) b = static_cast<std::uint8_t>(rng());
    f.ethertype = static_cast<std::uint16_t>(rng());
    f.payload.resize(rng() % 1500);
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
    frames.push_back({from_micros(us), std::move(f)});
  }
  const auto path = dir.file("rt.pcap");
  write_pcap(path, frames);
  const auto back = read_pcap(path);
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ASSERT_EQ(to_micros(back[i].ts), to_micros(frames[i].ts)) << i;
    ASSERT_EQ(back[i].frame, frames[i].frame) << i;
  }
}

// ---- notice log -----------------------------------------------------------------

TEST(NoticeLog, InjectedSequenceLine) {
  EXPECT_EQ(to_json_line(injected_notice()),
            R"({"ts":1700000002.005,"note":"N6.FRER.OutOfOrderFrames",)"
            R"("msg":"out of order frame with sequence number 7148, expected 54972",)"
            R"("stream_id":"0200000000010100","rule":"A5",)"
            R"("evidence":{"decision":"RogueOutOfRange","expected":"54972","observed":"7148"},)"
            R"("repeats":0})");
}

TEST(NoticeLog, DanglingHasEmptyEvidence) {
  Notice n;
  n.code = NoticeCode::N5_DanglingResources;
  n.rule = Rule::A4;
  n.ts = 31.0;
  n.msg = "reservation without traffic";
  n.stream_id = StreamId{kSrc, 1};
  const auto line = to_json_line(n);
  EXPECT_NE(line.find(R"("evidence":{})"), std::string::npos);
  EXPECT_EQ(parse_json_line(line).evidence.size(), 0u);
}

TEST(NoticeLog, RoundTripThroughStream) {
  std::ostringstream buf;
  NoticeLog log(buf);
  Notice route;
  route.code = NoticeCode::N7_ExcessiveMemberStreams;
  route.rule = Rule::A6;
  route.ts = 5.0;
  route.evidence = {{"link", "TSN2-TSN3"}, {"shared_nodes", "TSN2,TSN3"}, {"paths", "0,1"}};
  log.emit(injected_notice());
  log.emit(route);
  EXPECT_EQ(log.written(), 2u);
  std::istringstream in(buf.str());
  std::string line;
  std::vector<Notice> back;
  while (std::getline(in, line)) back.push_back(from_record(parse_json_line(line)));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], injected_notice());
  EXPECT_FALSE(back[1].stream_id);
}

TEST(NoticeLog, SchemaViolationsRejected) {
  const std::string good = to_json_line(injected_notice());
  EXPECT_NO_THROW((void)parse_json_line(good));
  auto mutate = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_THROW((void)parse_json_line(mutate(R"("observed":"7148")", R"("seen":"7148")")), NoticeLogError);
  EXPECT_THROW((void)parse_json_line(mutate("N6.FRER.OutOfOrderFrames", "N9.X")), NoticeLogError);
  EXPECT_THROW((void)parse_json_line(mutate(R"("rule":"A5")", R"("rule":"B1")")), NoticeLogError);
  EXPECT_THROW((void)parse_json_line(mutate(R"("repeats":0)", R"("repeats":0,"x":1)")), NoticeLogError);
  EXPECT_THROW((void)parse_json_line("{not json"), NoticeLogError);
}

// ---- replay ---------------------------------------------------------------------

TEST(Replay, PublishesEveryFrerFrameInOrder) {
  std::vector<TimestampedFrame> frames;
  for (int i = 0; i < 1000; ++i) frames.push_back({i * 0.001, rtag_frame(static_cast<std::uint16_t>(i))});
  EventBus bus;
  auto sub = bus.subscribe(Topic::Frer);
  SpanSource src{std::span<const TimestampedFrame>(frames)};
  const auto r = replay(src, bus);
  EXPECT_EQ(r.frames_published, 1000u);
  EXPECT_EQ(r.published_by_kind[static_cast<std::size_t>(FrameKind::Frer)], 1000u);
  EXPECT_TRUE(r.lossless());
  for (int i = 0; i < 1000; ++i) {
    auto e = sub.try_next();
    ASSERT_TRUE(e);
    ASSERT_EQ(std::get<RTagFrame>(e->payload).sequence_number, i);
  }
}

TEST(Replay, MalformedFramesAreCountedNotFatal) {
  std::vector<RawFrame> frames;
  for (int i = 0; i < 10; ++i) {
    Bytes b = to_wire(rtag_frame(static_cast<std::uint16_t>(i)));
    b.resize(14 + 3);  // R-TAG truncated
    frames.push_back({i * 0.1, b});
  }
  frames.push_back({1.0, Bytes(5, 0)});                      // short Ethernet
  frames.push_back({1.1, to_wire(EtherFrame{kDst, kSrc, 0x0800, {1}})});
  frames.push_back({1.2, to_wire(rtag_frame(77))});
  EventBus bus;
  SpanSource src{std::span<const RawFrame>(frames)};
  const auto r = replay(src, bus);
  EXPECT_EQ(r.parse_errors, 11u);
  EXPECT_EQ(r.other_count, 1u);
  EXPECT_EQ(r.frames_published, 1u);
  EXPECT_TRUE(r.lossless());
}

TEST(Replay, TimestampsNeverDecrease) {
  std::vector<TimestampedFrame> frames = {
      {5.0, rtag_frame(1)}, {4.0, rtag_frame(2)}, {6.0, rtag_frame(3)}};
  EventBus bus;
  auto sub = bus.subscribe(Topic::Frer);
  SpanSource src{std::span<const TimestampedFrame>(frames)};
  (void)replay(src, bus);
  std::vector<double> ts;
  while (auto e = sub.try_next()) ts.push_back(e->timestamp);
  EXPECT_EQ(ts, (std::vector<double>{5.0, 5.0, 6.0}));
}

TEST(Replay, SpeedFactorPacing) {
  std::vector<TimestampedFrame> frames;
  for (int i = 0; i <= 20; ++i) frames.push_back({100.0 + i * 0.01, rtag_frame(static_cast<std::uint16_t>(i))});
  EventBus bus;
  SpanSource fast{std::span<const TimestampedFrame>(frames)};
  EXPECT_LT(replay(fast, bus, 0.0).wall_s, 0.2);
  SpanSource paced{std::span<const TimestampedFrame>(frames)};
  const auto r = replay(paced, bus, 1.0);
  EXPECT_GE(r.wall_s, 0.2);
  EXPECT_NEAR(r.capture_span_s, 0.2, 1e-9);
  SpanSource bad{std::span<const TimestampedFrame>(frames)};
  EXPECT_THROW((void)replay(bad, bus, -1.0), std::invalid_argument);
}

// ---- pipeline -----------------------------------------------------------------

TEST(Monitor, InjectedFrameThroughPipeline) {
  const StreamId id{kSrc, 0x0100};
  std::vector<TimestampedFrame> frames;
  SrpTalkerAdvertise adv{id, {1, 100, 1, 150}, {2, 0}, kDst};
  frames.push_back({10.0, encode(adv, {{0x01, 0x80, 0xC2, 0, 0, 0x0E}, kSrc})});
  frames.push_back({10.001, encode(SrpListenerResponse{id, TalkerStatus::Ready},
                                   {{0x01, 0x80, 0xC2, 0, 0, 0x0E}, kSrc})});
  for (int i = 0; i < 5; ++i) {
    frames.push_back({10.01 + i * 0.01, rtag_frame(static_cast<std::uint16_t>(54968 + i))});
    frames.push_back({10.01 + i * 0.01, rtag_frame(static_cast<std::uint16_t>(54968 + i))});
  }
  frames.push_back({10.055, rtag_frame(7148)});
  MonitorOptions opts;
  opts.fixed_clock = true;
  opts.bus_capacity = 2;
  std::vector<std::string> lines;
  SpanSource src{std::span<const TimestampedFrame>(frames)};
  const auto r = run_monitor(src, opts, [&](const Notice& n) { lines.push_back(to_json_line(n)); });
  ASSERT_EQ(r.notices.size(), 1u);
  EXPECT_EQ(r.counts.at(NoticeCode::N6_OutOfOrderFrames), 1u);
  EXPECT_DOUBLE_EQ(r.notices[0].ts, 10.055);
  EXPECT_EQ(r.notices[0].evidence.at("observed"), "7148");
  EXPECT_EQ(lines.size(), 1u);
  EXPECT_TRUE(r.replay.lossless());
}

TEST(Monitor, SinkFailurePropagates) {
  std::vector<TimestampedFrame> frames;
  for (int i = 0; i < 200; ++i) frames.push_back({i * 0.001, rtag_frame(7)});
  MonitorOptions opts;
  opts.bus_capacity = 1;
  SpanSource src{std::span<const TimestampedFrame>(frames)};
  EXPECT_THROW((void)run_monitor(src, opts, [](const Notice&) { throw std::runtime_error("disk full"); }),
               std::runtime_error);
}

TEST(Monitor, MissingPcapThrows) {
  EXPECT_THROW((void)run_monitor_pcap("/nonexistent/x.pcap", MonitorOptions{}), PcapError);
}
