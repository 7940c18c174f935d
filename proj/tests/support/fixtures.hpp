// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace sqlsynth::testing {

/// Mixed-shape SQL corpus used across parser, similarity, and report tests.
inline const std::vector<std::string>& fixture_queries() {
    static const std::vector<std::string> queries = {
        "SELECT 1",
        "SELECT * FROM orders",
        "SELECT id, name FROM customers WHERE age > 30",
        "SELECT a, b, c FROM t1 WHERE a = 5 AND b < 10",
        "SELECT COUNT(*) FROM orders WHERE status = 'open'",
        "SELECT o.id, c.name FROM orders o JOIN customers c ON o.customer_id = c.id",
        "SELECT * FROM a JOIN b ON a.x = b.x JOIN c ON b.y = c.y",
        "SELECT dept, AVG(salary) FROM employees GROUP BY dept",
        "SELECT dept, SUM(salary) AS total FROM employees GROUP BY dept HAVING SUM(salary) > 100000",
        "SELECT name FROM products WHERE price BETWEEN 10 AND 50",
        "SELECT name FROM products WHERE category IN ('toys', 'games')",
        "SELECT name FROM products WHERE description LIKE '%blue%'",
        "SELECT id FROM users WHERE deleted_at IS NULL",
        "SELECT id FROM users WHERE email IS NOT NULL ORDER BY id DESC LIMIT 10",
        "SELECT * FROM events WHERE ts >= '2021-01-01' AND ts < '2022-01-01'",
        "SELECT customer_id FROM orders WHERE total > (SELECT AVG(total) FROM orders)",
        "SELECT * FROM items WHERE id IN (SELECT item_id FROM order_lines WHERE qty > 2)",
        "SELECT * FROM customers c WHERE EXISTS (SELECT 1 FROM orders o WHERE o.customer_id = c.id)",
        "SELECT * FROM customers c WHERE NOT EXISTS (SELECT 1 FROM orders o WHERE o.customer_id = c.id)",
        "WITH recent AS (SELECT * FROM orders WHERE ts > '2023-06-01') SELECT COUNT(*) FROM recent",
        "WITH big AS (SELECT * FROM orders WHERE total > 500), little AS (SELECT * FROM orders "
        "WHERE total < 10) SELECT * FROM big UNION SELECT * FROM little",
        "SELECT region, COUNT(DISTINCT customer_id) FROM sales GROUP BY region",
        "SELECT name, CASE WHEN score >= 90 THEN 'a' WHEN score >= 80 THEN 'b' ELSE 'c' END "
        "AS grade FROM students",
        "SELECT CAST(price AS INTEGER) FROM products",
        "SELECT name FROM t ORDER BY name ASC NULLS LAST",
        "SELECT x + y * 2 AS v FROM points WHERE x - y >= 0",
        "SELECT first_name || ' ' || last_name AS full_name FROM people",
        "SELECT * FROM a LEFT JOIN b ON a.id = b.a_id WHERE b.id IS NULL",
        "SELECT * FROM a LEFT OUTER JOIN b ON a.id = b.a_id",
        "SELECT * FROM a CROSS JOIN b",
        "SELECT * FROM a, b WHERE a.id = b.a_id",
        "SELECT * FROM t1 JOIN t2 USING (id)",
        "SELECT * FROM (SELECT id, total FROM orders WHERE total > 0) sub WHERE sub.total < 100",
        "SELECT product_id, SUM(qty) FROM order_lines GROUP BY product_id ORDER BY SUM(qty) "
        "DESC LIMIT 5",
        "SELECT id FROM t LIMIT 10 OFFSET 20",
        "SELECT DISTINCT city FROM customers",
        "SELECT MIN(price), MAX(price) FROM products",
        "SELECT name, ROW_NUMBER() OVER (PARTITION BY dept ORDER BY salary DESC) AS rn "
        "FROM employees",
        "SELECT name, SUM(amount) OVER (ORDER BY ts ROWS BETWEEN UNBOUNDED PRECEDING AND "
        "CURRENT ROW) AS running FROM payments",
        "SELECT t.id FROM t WHERE t.status = 'active' AND (t.kind = 'x' OR t.kind = 'y')",
        "SELECT id FROM logs WHERE NOT (level = 'debug')",
        "SELECT a.id FROM accounts a JOIN (SELECT account_id, COUNT(*) AS n FROM logins GROUP "
        "BY account_id) l ON a.id = l.account_id WHERE l.n > 3",
        "SELECT * FROM orders WHERE customer_id IN (SELECT id FROM customers WHERE region IN "
        "(SELECT region FROM regions WHERE active = 1))",
        "SELECT s.name FROM suppliers s WHERE s.id NOT IN (SELECT supplier_id FROM shipments)",
        "SELECT COALESCE(nickname, name) FROM users",
        "SELECT ABS(balance) FROM accounts WHERE balance < 0",
        "SELECT category, COUNT(*) AS n, AVG(price) AS avg_price FROM products GROUP BY "
        "category HAVING COUNT(*) > 1 ORDER BY n DESC",
        "SELECT * FROM orders o JOIN order_lines ol ON o.id = ol.order_id JOIN products p ON "
        "ol.product_id = p.id WHERE p.price > 20 AND o.status = 'shipped'",
        "SELECT strftime('%Y', ts) AS year, COUNT(*) FROM events GROUP BY 1",
        "SELECT 2 * (3 + 4)",
        "SELECT * FROM inventory WHERE qty % 2 = 0 AND qty / 2 > 10",
    };
    return queries;
}

}  // namespace sqlsynth::testing
