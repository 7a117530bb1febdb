package demo;

import java.util.ArrayList;
import java.util.List;

/** A running balance with bounded history. */
public class Ledger {
    private final List<Integer> entries = new ArrayList<>();
    private int balance;

    /**
     * Records a deposit and returns the balance after it is applied.
     * @param amount positive amount
     * @return the new balance
     */
    public int deposit(int amount) {
        if (amount <= 0) {
            throw new IllegalArgumentException("amount");
        }
        entries.add(amount);
        balance = balance + amount;
        if (entries.size() > 100) {
            entries.remove(0);
        }
        return balance;
    }

    /**
     * Withdraws the amount when the balance allows it and reports success.
     * @param amount positive amount
     * @return true when the withdrawal was applied
     */
    public boolean withdraw(int amount) {
        if (amount <= 0) {
            return false;
        }
        if (balance - amount < 0) {
            return false;
        }
        entries.add(-amount);
        balance = balance - amount;
        return true;
    }

    /**
     * Returns the largest single deposit in the history, or zero.
     * @return the maximum deposit
     */
    public int largestDeposit() {
        int best = 0;
        for (int e : entries) {
            if (e > 0 && e > best) {
                best = e;
            }
        }
        if (best == 0) {
            return 0;
        }
        return best;
    }

    /**
     * Returns the sum of the last n entries, counting withdrawals as negative.
     * @param n number of entries from the end
     * @return the sum of the recent entries
     */
    public int recentSum(int n) {
        int total = 0;
        int start = entries.size() - n;
        if (start < 0) {
            start = 0;
        }
        for (int i = start; i < entries.size(); i++) {
            total = total + entries.get(i);
        }
        return total;
    }

    /**
     * Counts the withdrawals in the history.
     * @return the number of negative entries
     */
    public int withdrawalCount() {
        int count = 0;
        for (int i = 0; i < entries.size(); i++) {
            if (entries.get(i) < 0) {
                count = count + 1;
            }
        }
        if (count == 0) {
            return 0;
        }
        return count;
    }

    /**
     * {@inheritDoc}
     */
    @Override
    public String toString() {
        StringBuilder sb = new StringBuilder();
        for (int e : entries) {
            if (sb.length() > 0) {
                sb.append(",");
            }
            sb.append(e);
        }
        sb.append("=");
        sb.append(balance);
        return sb.toString();
    }
}
