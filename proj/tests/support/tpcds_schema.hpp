// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// TPC-DS-shaped DDL: the standard 24 table names with representative columns
// and the fact-to-dimension foreign keys exercised by the ingestion tests.
// Column lists are abbreviated; the structure (table set + star joins) is
// what matters here.
#pragma once

namespace sqlsynth::testing {

inline const char* tpcds_schema_sql() {
    return R"sql(
CREATE TABLE date_dim (d_date_sk INTEGER PRIMARY KEY, d_date TEXT, d_year INTEGER,
                       d_moy INTEGER, d_dom INTEGER);
CREATE TABLE time_dim (t_time_sk INTEGER PRIMARY KEY, t_time INTEGER, t_hour INTEGER,
                       t_minute INTEGER);
CREATE TABLE customer_address (ca_address_sk INTEGER PRIMARY KEY, ca_city TEXT,
                               ca_state TEXT, ca_zip TEXT);
CREATE TABLE customer_demographics (cd_demo_sk INTEGER PRIMARY KEY, cd_gender TEXT,
                                    cd_marital_status TEXT);
CREATE TABLE household_demographics (hd_demo_sk INTEGER PRIMARY KEY,
                                     hd_income_band_sk INTEGER REFERENCES income_band(ib_income_band_sk),
                                     hd_buy_potential TEXT);
CREATE TABLE income_band (ib_income_band_sk INTEGER PRIMARY KEY, ib_lower_bound INTEGER,
                          ib_upper_bound INTEGER);
CREATE TABLE customer (c_customer_sk INTEGER PRIMARY KEY, c_first_name TEXT, c_last_name TEXT,
                       c_current_addr_sk INTEGER REFERENCES customer_address(ca_address_sk),
                       c_current_cdemo_sk INTEGER REFERENCES customer_demographics(cd_demo_sk),
                       c_current_hdemo_sk INTEGER REFERENCES household_demographics(hd_demo_sk));
CREATE TABLE store (s_store_sk INTEGER PRIMARY KEY, s_store_name TEXT, s_city TEXT,
                    s_state TEXT);
CREATE TABLE call_center (cc_call_center_sk INTEGER PRIMARY KEY, cc_name TEXT, cc_class TEXT);
CREATE TABLE catalog_page (cp_catalog_page_sk INTEGER PRIMARY KEY, cp_type TEXT);
CREATE TABLE web_site (web_site_sk INTEGER PRIMARY KEY, web_name TEXT, web_class TEXT);
CREATE TABLE web_page (wp_web_page_sk INTEGER PRIMARY KEY, wp_url TEXT, wp_type TEXT);
CREATE TABLE warehouse (w_warehouse_sk INTEGER PRIMARY KEY, w_warehouse_name TEXT,
                        w_city TEXT);
CREATE TABLE ship_mode (sm_ship_mode_sk INTEGER PRIMARY KEY, sm_type TEXT, sm_carrier TEXT);
CREATE TABLE reason (r_reason_sk INTEGER PRIMARY KEY, r_reason_desc TEXT);
CREATE TABLE promotion (p_promo_sk INTEGER PRIMARY KEY, p_promo_name TEXT, p_channel_tv TEXT);
CREATE TABLE item (i_item_sk INTEGER PRIMARY KEY, i_item_desc TEXT, i_brand TEXT,
                   i_category TEXT, i_current_price REAL);
CREATE TABLE inventory (inv_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                        inv_item_sk INTEGER REFERENCES item(i_item_sk),
                        inv_warehouse_sk INTEGER REFERENCES warehouse(w_warehouse_sk),
                        inv_quantity_on_hand INTEGER);
CREATE TABLE store_sales (ss_sold_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                          ss_sold_time_sk INTEGER REFERENCES time_dim(t_time_sk),
                          ss_item_sk INTEGER REFERENCES item(i_item_sk),
                          ss_customer_sk INTEGER REFERENCES customer(c_customer_sk),
                          ss_store_sk INTEGER REFERENCES store(s_store_sk),
                          ss_promo_sk INTEGER REFERENCES promotion(p_promo_sk),
                          ss_quantity INTEGER, ss_net_paid REAL);
CREATE TABLE store_returns (sr_returned_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                            sr_item_sk INTEGER REFERENCES item(i_item_sk),
                            sr_customer_sk INTEGER REFERENCES customer(c_customer_sk),
                            sr_store_sk INTEGER REFERENCES store(s_store_sk),
                            sr_reason_sk INTEGER REFERENCES reason(r_reason_sk),
                            sr_return_amt REAL);
CREATE TABLE catalog_sales (cs_sold_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                            cs_item_sk INTEGER REFERENCES item(i_item_sk),
                            cs_bill_customer_sk INTEGER REFERENCES customer(c_customer_sk),
                            cs_catalog_page_sk INTEGER REFERENCES catalog_page(cp_catalog_page_sk),
                            cs_ship_mode_sk INTEGER REFERENCES ship_mode(sm_ship_mode_sk),
                            cs_call_center_sk INTEGER REFERENCES call_center(cc_call_center_sk),
                            cs_quantity INTEGER, cs_net_paid REAL);
CREATE TABLE catalog_returns (cr_returned_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                              cr_item_sk INTEGER REFERENCES item(i_item_sk),
                              cr_reason_sk INTEGER REFERENCES reason(r_reason_sk),
                              cr_return_amount REAL);
CREATE TABLE web_sales (ws_sold_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                        ws_item_sk INTEGER REFERENCES item(i_item_sk),
                        ws_bill_customer_sk INTEGER REFERENCES customer(c_customer_sk),
                        ws_web_page_sk INTEGER REFERENCES web_page(wp_web_page_sk),
                        ws_web_site_sk INTEGER REFERENCES web_site(web_site_sk),
                        ws_warehouse_sk INTEGER REFERENCES warehouse(w_warehouse_sk),
                        ws_quantity INTEGER, ws_net_paid REAL);
CREATE TABLE web_returns (wr_returned_date_sk INTEGER REFERENCES date_dim(d_date_sk),
                          wr_item_sk INTEGER REFERENCES item(i_item_sk),
                          wr_reason_sk INTEGER REFERENCES reason(r_reason_sk),
                          wr_return_amt REAL);
)sql";
}

}  // namespace sqlsynth::testing
