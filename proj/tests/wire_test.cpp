#include <gtest/gtest.h>

#include <random>

#include "tsnzeek/wire.hpp"

using namespace tsnzeek;

namespace {

constexpr MacAddress kDst{0x91, 0xE0, 0xF0, 0x00, 0x01, 0x02};
constexpr MacAddress kSrc{0x02, 0x00, 0x00, 0x00, 0x00, 0x01};

EtherFrame frame_with(std::uint16_t ethertype, Bytes payload) {
  return EtherFrame{kDst, kSrc, ethertype, std::move(payload)};
}

SrpTalkerAdvertise sample_advertise() {
  SrpTalkerAdvertise adv;
  adv.stream_id = {kSrc, 0x0100};
  adv.traffic_spec = {1, 8000, 1, 128};
  adv.requirements = {2, 500};
  adv.dst_mac_of_stream = kDst;
  return adv;
}

}  // namespace

TEST(Classify, SrpByMessageType) {
  EXPECT_EQ(classify(frame_with(0x22EA, {1})), FrameKind::SrpTalker);
  EXPECT_EQ(classify(frame_with(0x22EA, {2})), FrameKind::SrpListener);
  EXPECT_EQ(classify(frame_with(0x22EA, {7})), FrameKind::Other);
  EXPECT_EQ(classify(frame_with(0x22EA, {})), FrameKind::Other);
}

TEST(Classify, FrerAndOther) {
  EXPECT_EQ(classify(frame_with(0xF1C1, {})), FrameKind::Frer);
  EXPECT_EQ(classify(frame_with(0x0800, {1, 2, 3})), FrameKind::Other);
}

TEST(ParseSrp, TalkerFieldsAndBandwidth) {
  const Bytes payload = encode_payload(sample_advertise());
  ASSERT_EQ(payload.size(), kSrpTalkerLen);
  // type, stream id, then interval numerator 1 and denominator 8000 big-endian
  EXPECT_EQ(payload[0], 1);
  EXPECT_EQ(payload[9], 0x00);
  EXPECT_EQ(payload[12], 0x01);
  EXPECT_EQ(payload[15], 0x1F);
  EXPECT_EQ(payload[16], 0x40);

  const auto parsed = parse_srp(payload);
  const auto& adv = std::get<SrpTalkerAdvertise>(parsed.message);
  EXPECT_EQ(adv.traffic_spec, (TrafficSpecification{1, 8000, 1, 128}));
  const double by_hand = 1.0 * 128 * 8 * 8000;
  EXPECT_DOUBLE_EQ(adv.traffic_spec.bandwidth_bps(), by_hand);
  EXPECT_DOUBLE_EQ(adv.traffic_spec.bandwidth_bps(), 8'192'000.0);
  EXPECT_DOUBLE_EQ(adv.traffic_spec.frame_rate(), 8000.0);
  EXPECT_EQ(parsed.trailing_bytes, 0u);
}

TEST(ParseSrp, ListenerStatus) {
  Bytes p{2, 0x02, 0, 0, 0, 0, 1, 0x01, 0x00, 1};
  const auto resp = std::get<SrpListenerResponse>(parse_srp(p).message);
  EXPECT_EQ(resp.talker_status, TalkerStatus::Ready);
  EXPECT_EQ(resp.stream_id.unique_id, 0x0100);
}

TEST(ParseSrp, Errors) {
  auto code_of = [](const Bytes& p) {
    try {
      (void)parse_srp(p);
    } catch (const WireError& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return WireErrorCode::InvalidModel;
  };
  EXPECT_EQ(code_of({1, 2, 3}), WireErrorCode::TruncatedFrame);
  EXPECT_EQ(code_of({}), WireErrorCode::TruncatedFrame);
  EXPECT_EQ(code_of({9, 0, 0, 0, 0, 0, 0, 0, 0, 0}), WireErrorCode::BadMessageType);
  EXPECT_EQ(code_of({2, 0, 0, 0, 0, 0, 0, 0, 0, 3}), WireErrorCode::BadEnum);

  auto bad = encode_payload(sample_advertise());
  bad[13] = bad[14] = bad[15] = bad[16] = 0;  // denominator 0
  EXPECT_EQ(code_of(bad), WireErrorCode::InvalidModel);
}

TEST(ParseSrp, TrailingBytesCounted) {
  auto p = encode_payload(sample_advertise());
  p.insert(p.end(), {0xAA, 0xBB, 0xCC});
  EXPECT_EQ(parse_srp(p).trailing_bytes, 3u);
}

TEST(ParseRTag, SequenceNumberBigEndian) {
  const auto f = parse_rtag(frame_with(0xF1C1, {0x00, 0x00, 0xD6, 0xBC, 0x88, 0xB5, 0x01, 0x00}));
  EXPECT_EQ(f.sequence_number, 54972);
  EXPECT_EQ(f.encapsulated_ethertype, 0x88B5);
  EXPECT_EQ(f.stream_handle, (StreamId{kDst, 0x0100}));
  EXPECT_EQ(f.payload_len, 2u);

  EXPECT_EQ(parse_rtag(frame_with(0xF1C1, Bytes(8, 0))).sequence_number, 0);
}

TEST(ParseRTag, Truncated) {
  try {
    (void)parse_rtag(frame_with(0xF1C1, {0, 0, 1, 2}));
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireErrorCode::TruncatedFrame);
  }
}

TEST(Encode, RTagRoundTripIsByteExact) {
  const Bytes raw = to_wire(frame_with(0xF1C1, {0x00, 0x00, 0x12, 0x34, 0x08, 0x00, 0xAB, 0xCD,
                                                1, 2, 3, 4, 5}));
  const EtherFrame f = from_wire(raw);
  const RTagFrame model = parse_rtag(f);
  EXPECT_EQ(to_wire(encode(model, f.src_mac)), raw);
}

TEST(Encode, SeamlessTreesSurvive) {
  auto adv = sample_advertise();
  adv.requirements.num_seamless_trees = 2;
  const auto back = decode_tsn(from_wire(to_wire(encode(adv, {kDst, kSrc}))));
  ASSERT_TRUE(back);
  EXPECT_EQ(std::get<SrpTalkerAdvertise>(*back).requirements.num_seamless_trees, 2);
}

TEST(Encode, InvalidModelRejected) {
  auto adv = sample_advertise();
  adv.traffic_spec.max_frame_size = 10;
  EXPECT_THROW((void)encode_payload(adv), WireError);
  RTagFrame f;
  f.data = {1, 2, 3};
  f.payload_len = 2;
  EXPECT_THROW((void)encode_payload(f), WireError);
}

TEST(StreamIdText, HexRoundTrip) {
  const StreamId id{{0x02, 0, 0, 0, 0, 0x66}, 0x0666};
  EXPECT_EQ(id.to_hex(), "0200000000660666");
  EXPECT_EQ(StreamId::from_hex("0200000000660666"), id);
  EXPECT_FALSE(StreamId::from_hex("02000000006606"));
  EXPECT_FALSE(StreamId::from_hex("zz00000000660666"));
}

TEST(FromWire, ShortFrame) {
  EXPECT_THROW((void)from_wire(Bytes(13, 0)), WireError);
}

// Randomised round trip over all three models.
TEST(Property, RandomModelsRoundTrip) {
  std::mt19937_64 rng(42);
  auto mac = [&] {
    MacAddress m;
    for (auto& b : m) b = static_cast<std::uint8_t>(rng());
    return m;
  };
  for (int i = 0; i < 3000; ++i) {
    SrpTalkerAdvertise adv;
    adv.stream_id = {mac(), static_cast<std::uint16_t>(rng())};
    adv.traffic_spec = {static_cast<std::uint32_t>(rng() % 1000 + 1),
                        static_cast<std::uint32_t>(rng() % 100000 + 1),
                        static_cast<std::uint16_t>(rng() % 100 + 1),
                        static_cast<std::uint16_t>(rng() % 1455 + 64)};
    adv.requirements = {static_cast<std::uint8_t>(rng() % 8 + 1), static_cast<std::uint32_t>(rng())};
    adv.dst_mac_of_stream = mac();
    const Addressing addr{mac(), mac()};
    const auto t = decode_tsn(from_wire(to_wire(encode(adv, addr))));
    ASSERT_TRUE(t);
    ASSERT_EQ(std::get<SrpTalkerAdvertise>(*t), adv);

    SrpListenerResponse resp{{mac(), static_cast<std::uint16_t>(rng())},
                             static_cast<TalkerStatus>(rng() % 3)};
    const auto l = decode_tsn(from_wire(to_wire(encode(resp, addr))));
    ASSERT_EQ(std::get<SrpListenerResponse>(*l), resp);

    RTagFrame f;
    f.stream_handle = {mac(), static_cast<std::uint16_t>(rng())};
    f.sequence_number = static_cast<std::uint16_t>(rng());
    f.encapsulated_ethertype = static_cast<std::uint16_t>(rng());
    f.data.resize(rng() % 1400);
    for (auto& b : f.data) b = static_cast<std::uint8_t>(rng());
    f.payload_len = static_cast<std::uint32_t>(f.data.size() + 2);
    const Bytes raw = to_wire(encode(f, mac()));
    const auto r = decode_tsn(from_wire(raw));
    ASSERT_EQ(std::get<RTagFrame>(*r), f);
  }
}

// Arbitrary bytes either decode or raise WireError.
TEST(Property, ParsersAreTotalOnGarbage) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    Bytes b(rng() % 80);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    if (b.size() >= 14 && rng() % 2) {
      b[12] = (rng() % 2) ? 0x22 : 0xF1;
      b[13] = b[12] == 0x22 ? 0xEA : 0xC1;
    }
    try {
      const EtherFrame f = from_wire(b);
      (void)classify(f);
      (void)decode_tsn(f);
      (void)decode_tsn(f);
    } catch (const WireError&) {
    }
  }
}
