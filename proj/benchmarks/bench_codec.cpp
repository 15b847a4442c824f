#include <benchmark/benchmark.h>

#include "lorasim/codec.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/rng.hpp"

using namespace lorasim;

static void BM_EncodeDatagram(benchmark::State& state) {
  codec::Datagram d;
  d.token.value = 0x1234;
  d.kind = codec::DatagramKind::PushData;
  d.eui.bytes = {1, 2, 3, 4, 5, 6, 7, 8};
  codec::RxPacketMeta meta;
  meta.sf = 7;
  Bytes frame(37, 0x42);
  meta.data = base64_encode(frame);
  meta.size = frame.size();
  d.body = codec::encode_rxpk({meta});

  for (auto _ : state) {
    benchmark::DoNotOptimize(codec::encode_datagram(d));
  }
}
BENCHMARK(BM_EncodeDatagram);

static void BM_DecodeDatagram(benchmark::State& state) {
  codec::Datagram d;
  d.kind = codec::DatagramKind::PushData;
  codec::RxPacketMeta meta;
  meta.sf = 10;
  Bytes frame(37, 0x42);
  meta.data = base64_encode(frame);
  meta.size = frame.size();
  d.body = codec::encode_rxpk({meta});
  Bytes raw = codec::encode_datagram(d);

  for (auto _ : state) {
    benchmark::DoNotOptimize(codec::decode_datagram(raw));
  }
}
BENCHMARK(BM_DecodeDatagram);

static void BM_ParseRxpk(benchmark::State& state) {
  codec::RxPacketMeta meta;
  meta.sf = 12;
  Bytes frame(37, 0x42);
  meta.data = base64_encode(frame);
  meta.size = frame.size();
  Bytes body = codec::encode_rxpk({meta});

  for (auto _ : state) {
    benchmark::DoNotOptimize(codec::parse_rxpk(body));
  }
}
BENCHMARK(BM_ParseRxpk);

static void BM_ComputeMic(benchmark::State& state) {
  mac::NwkSKey key;
  for (std::size_t i = 0; i < 16; ++i) key.bytes[i] = static_cast<std::uint8_t>(i);
  mac::MacFrame f;
  f.mhdr = mac::kMhdrConfirmedUp;
  f.fcnt = 7;
  f.payload.assign(static_cast<std::size_t>(state.range(0)), 0x55);

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mac::compute_mic(key, f, mac::Direction::Up, mac::MicMode::V1_0, std::nullopt));
  }
}
BENCHMARK(BM_ComputeMic)->Arg(0)->Arg(25)->Arg(222);

BENCHMARK_MAIN();
