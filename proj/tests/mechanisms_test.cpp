#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace p2pclear;
using namespace p2pclear::testing;

namespace {

struct Reference : ::testing::Test {
  OrderBook book = reference_book();
  Determination d = determine(book);
  TradeLedger ledger = clear(book, d);

  Settlement run(Mechanism m) const { return settle(book, d, ledger, m); }
};

std::vector<Price> buyer_prices(const Settlement& s) {
  std::vector<Price> out(s.buyers.size());
  for (const auto& t : s.priced_trades) out[t.buyer] = t.buyer_price;
  return out;
}

std::vector<Price> decs(std::initializer_list<const char*> texts) {
  std::vector<Price> out;
  for (const char* t : texts) out.push_back(dec(t));
  return out;
}

}  // namespace

TEST(MechanismNames, RoundTrip) {
  for (auto m : all_mechanisms) EXPECT_EQ(parse_mechanism(to_string(m)), m);
  EXPECT_FALSE(parse_mechanism("dutch").has_value());
}

TEST(MechanismTraits, Classification) {
  for (auto m : {Mechanism::proposed, Mechanism::uniform, Mechanism::pay_as_bid, Mechanism::vickrey, Mechanism::gsp,
                 Mechanism::average}) {
    EXPECT_TRUE(traits(m).sbb());
    EXPECT_FALSE(traits(m).reduces_trade);
  }
  EXPECT_FALSE(traits(Mechanism::vcg).sbb());
  EXPECT_FALSE(traits(Mechanism::trade_reduction).sbb());
  EXPECT_TRUE(traits(Mechanism::trade_reduction).reduces_trade);
  EXPECT_EQ(traits(Mechanism::mcafee).budget, BudgetBalance::branch_dependent);
}

TEST(PriceRules, Proposed) {
  const auto book = build_book({offer("S1", 1, "10.0"), offer("S5", 1, "12.1"), offer("E", 1, "11.3")},
                               {bid("B1", 1, "14.0"), bid("B5", 1, "12.2"), bid("F", 1, "11.3")});
  EXPECT_EQ(price_proposed(book, {0, 0, 1}), dec("12.00"));
  EXPECT_EQ(price_proposed(book, {2, 1, 1}), dec("12.15"));
  EXPECT_EQ(price_proposed(book, {1, 2, 1}), dec("11.30"));
}

TEST(PriceRules, FallbacksWhenNoNextPrice) {
  const auto book = build_book({offer("S", 10, "10")}, {bid("B", 10, "11")});
  const auto d = determine(book);
  EXPECT_EQ(price_vickrey(d), dec("11"));
  EXPECT_EQ(price_gsp(book, {0, 0, 10}), dec("11"));

  const auto pair = build_book({offer("S", 10, "10")}, {bid("B", 10, "12")});
  const auto pd = determine(pair);
  EXPECT_EQ(price_uniform(pd), dec("12"));
  EXPECT_EQ(price_average(pair, pd), dec("11"));
  const auto vcg = price_vcg(pd);
  EXPECT_EQ(vcg.seller, dec("12"));
  EXPECT_EQ(vcg.buyer, dec("10"));
  const auto s = settle(pair, pd, clear(pair, pd), Mechanism::vcg);
  EXPECT_EQ(s.auctioneer_surplus, -Rational(2) * 10 / 1000);
}

TEST(PriceRules, LevelsNeedWinners) {
  const Determination none;
  EXPECT_THROW(price_uniform(none), std::invalid_argument);
  EXPECT_THROW(price_vcg(none), std::invalid_argument);
}

TEST_F(Reference, ProposedTradePrices) {
  const auto s = run(Mechanism::proposed);
  const auto expected = decs({"12.00", "11.75", "12.00", "11.75", "12.00", "12.50", "12.25", "12.15"});
  ASSERT_EQ(s.priced_trades.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_EQ(s.priced_trades[k].seller_price, expected[k]);
    EXPECT_EQ(s.priced_trades[k].buyer_price, expected[k]);
  }
  EXPECT_EQ(s.total_revenue, dec("0.755"));
  EXPECT_EQ(s.total_saving, dec("0.755"));
  EXPECT_EQ(s.trc, dec("1.510"));
  EXPECT_EQ(s.auctioneer_surplus, 0);
}

TEST_F(Reference, SingleLevelMechanisms) {
  EXPECT_EQ(price_uniform(d), dec("12.20"));
  EXPECT_EQ(price_vickrey(d), dec("12.00"));
  EXPECT_EQ(price_average(book, d), dec("12.08"));

  const auto uniform = run(Mechanism::uniform);
  EXPECT_EQ(uniform.total_revenue, dec("0.855"));
  EXPECT_EQ(uniform.total_saving, dec("0.655"));
  EXPECT_EQ(uniform.trc, dec("1.510"));

  const auto average = run(Mechanism::average);
  EXPECT_EQ(average.total_revenue, dec("0.771"));
  EXPECT_EQ(average.total_saving, dec("0.739"));

  const auto vickrey = run(Mechanism::vickrey);
  EXPECT_EQ(vickrey.sellers[4].revenue, dec("-0.010"));
}

TEST_F(Reference, PerBuyerMechanisms) {
  const auto pab = run(Mechanism::pay_as_bid);
  EXPECT_EQ(buyer_prices(pab), decs({"14.0", "13.5", "13.0", "12.5", "12.2"}));
  EXPECT_EQ(pab.total_saving, 0);
  for (const auto& b : pab.buyers) EXPECT_EQ(b.saving, 0);

  const auto gsp = run(Mechanism::gsp);
  EXPECT_EQ(buyer_prices(gsp), decs({"13.5", "13.0", "12.5", "12.2", "12.0"}));
  EXPECT_EQ(gsp.total_revenue, dec("1.210"));
  EXPECT_EQ(gsp.total_saving, dec("0.300"));
  EXPECT_EQ(gsp.trc, dec("1.510"));
}

TEST_F(Reference, Vcg) {
  const auto levels = price_vcg(d);
  EXPECT_EQ(levels.seller, dec("12.20"));
  EXPECT_EQ(levels.buyer, dec("12.10"));
  const auto s = run(Mechanism::vcg);
  EXPECT_EQ(s.trc, dec("1.580"));
  EXPECT_EQ(s.auctioneer_surplus, dec("-0.070"));
  EXPECT_FALSE(s.strongly_balanced());
}

TEST_F(Reference, TradeReduction) {
  const auto s = run(Mechanism::trade_reduction);
  EXPECT_TRUE(s.reduced);
  EXPECT_EQ(s.determination.sellers, 4u);
  EXPECT_EQ(s.determination.buyers, 4u);
  EXPECT_EQ(s.ledger.traded(), 600);
  for (const auto& t : s.priced_trades) {
    EXPECT_EQ(t.seller_price, dec("12.10"));
    EXPECT_EQ(t.buyer_price, dec("12.20"));
  }
  EXPECT_EQ(s.total_revenue, dec("0.785"));
  EXPECT_EQ(s.total_saving, dec("0.655"));
  EXPECT_EQ(s.trc, dec("1.440"));
  EXPECT_EQ(s.auctioneer_surplus, dec("0.060"));
}

TEST_F(Reference, McAfeeFallsBackToReduction) {
  const auto m = run(Mechanism::mcafee);
  const auto tr = run(Mechanism::trade_reduction);
  EXPECT_TRUE(m.reduced);
  EXPECT_EQ(m.ledger.trades, tr.ledger.trades);
  ASSERT_EQ(m.priced_trades.size(), tr.priced_trades.size());
  for (std::size_t k = 0; k < m.priced_trades.size(); ++k) {
    EXPECT_EQ(m.priced_trades[k].seller_price, tr.priced_trades[k].seller_price);
    EXPECT_EQ(m.priced_trades[k].buyer_price, tr.priced_trades[k].buyer_price);
  }
  EXPECT_EQ(m.trc, tr.trc);
  EXPECT_EQ(m.auctioneer_surplus, tr.auctioneer_surplus);
}

TEST(McAfee, InteriorBranchIsBalanced) {
  const auto book = build_book({offer("S1", 10, "10"), offer("S2", 10, "13")}, {bid("B1", 10, "12"), bid("B2", 10, "11")});
  const auto d = determine(book);
  ASSERT_EQ(d.sellers, 1u);
  const auto s = settle_mcafee(book, d);
  EXPECT_FALSE(s.reduced);
  ASSERT_EQ(s.priced_trades.size(), 1u);
  EXPECT_EQ(s.priced_trades[0].seller_price, dec("12.00"));
  EXPECT_EQ(s.priced_trades[0].buyer_price, dec("12.00"));
  EXPECT_EQ(s.auctioneer_surplus, 0);
}

TEST(McAfee, MissingNextPriceReduces) {
  const auto book = build_book({offer("S1", 10, "10"), offer("S2", 10, "11")}, {bid("B1", 10, "14"), bid("B2", 10, "13")});
  const auto d = determine(book);
  ASSERT_EQ(d.sellers, 2u);
  const auto s = settle_mcafee(book, d);
  EXPECT_TRUE(s.reduced);
  ASSERT_EQ(s.priced_trades.size(), 1u);
  EXPECT_EQ(s.priced_trades[0].seller_price, dec("11"));
  EXPECT_EQ(s.priced_trades[0].buyer_price, dec("13"));
}

TEST(TradeReduction, SinglePairEmptiesMarket) {
  const auto book = build_book({offer("S", 10, "10")}, {bid("B", 10, "12")});
  const auto d = determine(book);
  for (auto m : {Mechanism::trade_reduction, Mechanism::mcafee}) {
    const auto s = settle(book, d, clear(book, d), m);
    EXPECT_TRUE(s.priced_trades.empty());
    EXPECT_EQ(s.trc, 0);
  }
}

TEST(TradeReduction, ReallocationCanFlipPerspective) {
  // Full winner set is short on supply; without the marginal pair it is long.
  const auto book = build_book({offer("S1", 100, "10"), offer("S2", 10, "11")},
                               {bid("B1", 50, "15"), bid("B2", 200, "12")});
  const auto d = determine(book);
  ASSERT_EQ(select_perspective(d), Perspective::buyer);
  const auto s = settle_trade_reduction(book, d);
  EXPECT_EQ(s.ledger.perspective, Perspective::seller);
  EXPECT_EQ(s.ledger.traded(), 50);
  EXPECT_EQ(s.ledger.unsold, 50);
}

TEST(Settle, EmptyBookGivesZeroSettlement) {
  const auto book = build_book({}, {});
  const auto d = determine(book);
  const auto ledger = clear(book, d);
  for (auto m : all_mechanisms) {
    const auto s = settle(book, d, ledger, m);
    EXPECT_TRUE(s.priced_trades.empty());
    EXPECT_EQ(s.trc, 0);
    EXPECT_EQ(s.auctioneer_surplus, 0);
    EXPECT_EQ(s.mechanism, m);
  }
}

TEST(Settle, RejectsForeignLedger) {
  const auto book = reference_book();
  const auto d = determine(book);
  const auto other = build_book({offer("S", 1, "1")}, {bid("B", 1, "2")});
  const auto foreign = clear(other, determine(other));
  EXPECT_THROW(settle(book, d, foreign, Mechanism::proposed), std::invalid_argument);
}

TEST(SettleProperties, BudgetAndRationalityOnRandomBooks) {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 500; ++round) {
    const auto book = random_book(rng);
    const auto d = determine(book);
    const auto ledger = clear(book, d);
    for (auto m : all_mechanisms) {
      const auto s = settle(book, d, ledger, m);
      if (traits(m).sbb()) {
        ASSERT_TRUE(s.strongly_balanced()) << to_string(m);
        ASSERT_EQ(s.auctioneer_surplus, 0) << to_string(m);
      }
      if (m == Mechanism::trade_reduction || (m == Mechanism::mcafee && s.reduced)) {
        ASSERT_GE(s.auctioneer_surplus, 0);
      }
      if (m == Mechanism::mcafee && !s.reduced) { ASSERT_EQ(s.auctioneer_surplus, 0); }
      if (m == Mechanism::vcg) { ASSERT_LE(s.auctioneer_surplus, 0); }

      Money revenue = 0, saving = 0, surplus = 0;
      for (const auto& t : s.priced_trades) {
        revenue += value_of(t.seller_price - s.sellers[t.seller].reservation_price, t.energy);
        saving += value_of(s.buyers[t.buyer].bid - t.buyer_price, t.energy);
        surplus += value_of(t.buyer_price - t.seller_price, t.energy);
      }
      ASSERT_EQ(revenue, s.total_revenue);
      ASSERT_EQ(saving, s.total_saving);
      ASSERT_EQ(surplus, s.auctioneer_surplus);
      ASSERT_EQ(revenue + saving, s.trc);
    }

    const auto proposed = settle(book, d, ledger, Mechanism::proposed);
    ASSERT_EQ(proposed.total_revenue, proposed.total_saving);
    for (const auto& t : proposed.priced_trades) {
      ASSERT_LE(proposed.sellers[t.seller].reservation_price, t.seller_price);
      ASSERT_LE(t.buyer_price, proposed.buyers[t.buyer].bid);
    }
    for (const auto& o : proposed.sellers) ASSERT_GE(o.revenue, 0);
    for (const auto& b : proposed.buyers) ASSERT_GE(b.saving, 0);
  }
}
