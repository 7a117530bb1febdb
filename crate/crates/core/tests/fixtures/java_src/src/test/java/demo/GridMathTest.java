package demo;

import static org.junit.Assert.*;
import org.junit.Test;

public class GridMathTest {
    @Test
    public void testManhattan() {
        int r = GridMath.manhattan(1, 2, 4, -2);
        assertEquals(7, r);
    }

    @Test
    public void testGcd() {
        int r = GridMath.gcd(84, 36);
        assertEquals(12, r);
    }

    @Test
    public void testCellsWithin() {
        int r = GridMath.cellsWithin(2);
        assertEquals(25, r);
    }
}
